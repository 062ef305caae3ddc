#pragma once

// Folding two extensions that share a bottom trace into one. The fold acts
// on the last two axes (x1, x2) of a 2D or 3D grid, normalized to the unit
// square; any leading axis is carried along unchanged.

#include <optional>
#include <string_view>
#include <utility>

#include "sobolev_glue/core.hpp"

namespace sobolev_glue {

enum class FoldRegion { Sigma0, SigmaSharp, Sigma1 };

std::string_view to_string(FoldRegion region);

/// x1 <= x2/2 -> Sigma0; x2/2 < x1 <= x2 -> SigmaSharp; otherwise Sigma1.
FoldRegion classify_region(double x1, double x2) noexcept;

/// Source coordinates of the fold: which input is read (false: U0, true: U1)
/// and where on the unit square.
struct FoldSource {
  bool from_u1 = false;
  double x1 = 0.0;
  double x2 = 0.0;
};
FoldSource fold_source(double x1, double x2) noexcept;

struct FoldReport {
  double trace_bottom_error = 0.0;  // face x2 = 0 against U0
  double trace_left_error = 0.0;    // face x1 = 0 against U0
  double trace_right_error = 0.0;   // face x1 = 1 against U1
  double energy_in_0 = 0.0;
  double energy_in_1 = 0.0;
  double energy_out = 0.0;
  double ratio = 0.0;
  double p = 2.0;
  double constraint_violation = 0.0;  // before re-projection
};

struct FoldOptions {
  std::optional<double> trace_tol;  // default 10 h
  double p = 2.0;
};

/// Builds U* node by node and reports trace discrepancies and energies.
/// Throws PreconditionError if the bottom traces differ by more than trace_tol.
std::pair<GridMap, FoldReport> fold(const GridMap& u0, const GridMap& u1,
                                    const FoldOptions& options = {});

/// Recomputes the three trace discrepancies and the energy ratio from the maps alone.
FoldReport verify_fold_traces(const GridMap& folded, const GridMap& u0, const GridMap& u1,
                              double p = 2.0);

/// (sigma0^p + sigma_sharp^p)/2 + 1 and max(sigma0^p, sigma_sharp^p)/2 + 1 for the
/// two fold Jacobians [[2,0],[-2,1]] and [[0,1],[2,-1]].
double fold_energy_bound_sum(double p);
double fold_energy_bound_max(double p);

}  // namespace sobolev_glue
