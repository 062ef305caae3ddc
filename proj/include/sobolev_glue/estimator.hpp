#pragma once

// Approximate extension energies by gradient descent with a pinned bottom
// trace and a free top face, plus a linear lifting oracle for circle targets.

#include <cstdint>
#include <string>
#include <vector>

#include "sobolev_glue/core.hpp"
#include "sobolev_glue/energy.hpp"

namespace sobolev_glue {

enum class ProjectionMode { Nearest, None };

struct MinimizeConfig {
  double p = 2.0;
  int max_iterations = 5000;
  double step = 0.0;          // initial step; 0 picks one from the grid spacing
  bool backtracking = true;   // false: fixed step, any increase is an error
  double shrink = 0.5;
  int max_backtracks = 40;
  double tol = 1e-9;          // relative decrease counted as stalled
  int patience = 5;           // consecutive stalled steps before stopping
  std::uint64_t seed = 0;
  double init_noise = 0.0;    // amplitude of seeded noise on the interior start
  ProjectionMode projection = ProjectionMode::Nearest;

  void validate() const;
};

/// `key = value` lines; '#' starts a comment. Unknown keys are parameter errors.
MinimizeConfig parse_minimize_config(const std::string& text, MinimizeConfig base = {});

struct StepRecord {
  int iteration = 0;
  double step = 0.0;
  double energy = 0.0;  // trial objective
  bool accepted = false;
};

struct MinimizeResult {
  GridMap map;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<StepRecord> log;
};

/// base x (0, depth) with `depth_nodes` nodes on the new last axis.
DomainSpec collar_domain(const DomainSpec& base, int depth_nodes, double depth = 1.0);

/// Projected gradient descent on the p-Dirichlet energy, starting from
/// U(., t) = u(.). Throws OptimizationError on non-finite values or, with a
/// fixed step, on an energy increase.
MinimizeResult minimize_extension(const TraceMap& u, int depth_nodes, double depth,
                                  const MinimizeConfig& cfg);

/// Unconstrained descent on Dirichlet energy plus the penalty. The result is
/// Euclidean-valued; its energy is penalized_energy of the final iterate.
MinimizeResult minimize_penalized(const TraceMap& u, const PenaltySpec& penalty, int depth_nodes,
                                  double depth, const MinimizeConfig& cfg);

struct SweepPoint {
  double eps = 0.0;
  double depth = 0.0;
  double energy = 0.0;
  int iterations = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;       // eps-major, in input order
  std::vector<double> limsup_by_depth;  // max over eps of the energy, per depth
  bool bounded_in_eps = false;
  bool vanishing_in_depth = false;
};

/// minimize_penalized with F = dist(., N)^p / eps^p over every (eps, depth).
/// The depth grid keeps the spacing of `depth_nodes` nodes per unit depth.
SweepResult isobe_sweep(const TraceMap& u, double p, const std::vector<double>& eps_list,
                        const std::vector<double>& depth_list, int depth_nodes,
                        const MinimizeConfig& cfg);

struct OracleResult {
  GridMap map;
  double energy = 0.0;
  int degree = 0;
};

/// Lifts u: S^1 -> S^1, extends the lifting harmonically on the collar (fixed
/// bottom, free top) and wraps it back. Throws LiftingError on a jump >= pi.
OracleResult circle_lifting_oracle(const TraceMap& u, int depth_nodes, double depth = 1.0);

/// Winding number of a circle-valued trace on S^1.
int winding_number(const TraceMap& u);

}  // namespace sobolev_glue
