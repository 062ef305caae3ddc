#pragma once

// Discrete p-Dirichlet, Gagliardo and penalized energies.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sobolev_glue/core.hpp"

namespace sobolev_glue {

struct EnergyReport {
  double value = 0.0;
  double p = 2.0;
  std::optional<double> s;
  std::vector<int> resolution;
  std::string quadrature;
};

/// F(y) = dist(y, N)^power / eps^power, or nothing.
class PenaltySpec {
 public:
  enum class Kind { None, DistancePower };

  static PenaltySpec none() { return PenaltySpec(); }
  static PenaltySpec distance_power(const TargetSpec& manifold, double eps, double power);

  Kind kind() const noexcept { return kind_; }
  double eps() const noexcept { return eps_; }
  double power() const noexcept { return power_; }
  const TargetSpec& manifold() const noexcept { return manifold_; }

  double value(std::span<const double> y) const;
  /// Adds weight * dF/dy to `grad`.
  void add_gradient(std::span<const double> y, double weight, std::span<double> grad) const;

 private:
  Kind kind_ = Kind::None;
  double eps_ = 1.0;
  double power_ = 2.0;
  TargetSpec manifold_;
};

/// Forward-difference p-Dirichlet energy on a fixed grid, with its exact
/// gradient. Shares the cell structure across evaluations.
class DirichletOperator {
 public:
  DirichletOperator(DomainSpec domain, int nu);

  const DomainSpec& domain() const noexcept { return domain_; }
  double energy(std::span<const double> values, double p) const;
  /// Returns the energy and overwrites `grad` with its gradient.
  double energy_and_gradient(std::span<const double> values, double p,
                             std::span<double> grad) const;

 private:
  double evaluate(std::span<const double> values, double p, double* grad) const;

  DomainSpec domain_;
  int nu_;
  std::vector<std::size_t> low_;                // low-corner node of each cell
  std::vector<std::vector<std::size_t>> high_;  // per axis: node lo + e_k
};

/// sum over nodes of F(value) * trapezoid node weight. With `grad`, adds the gradient.
double penalty_energy(const DomainSpec& domain, std::span<const double> values,
                      const PenaltySpec& penalty, double* grad = nullptr);

/// sum over cells of |DU|^p * cell volume; DU is the forward-difference
/// Jacobian at the low corner, |.| the Frobenius norm. Requires p > 1.
EnergyReport dirichlet_p_energy(const NodeField& map, double p);

/// Double integral of |u(x)-u(y)|^p / d(x,y)^(sp+d) over base pairs, d the
/// geodesic distance (minimum image on periodic axes). Off-diagonal cell pairs
/// use the midpoint rule; each cell's self-interaction is integrated exactly
/// for the cell's affine part. Requires s in (0,1), p >= 1, base dimension 1 or 2.
EnergyReport gagliardo_energy(const TraceMap& u, double s, double p);

/// Dirichlet energy plus the node-integrated penalty.
EnergyReport penalized_energy(const GridMap& map, const PenaltySpec& penalty, double p);

}  // namespace sobolev_glue
