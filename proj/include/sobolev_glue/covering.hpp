#pragma once

// Chart coverings of S^1 and T^2 and the inductive gluing of patch
// extensions U_i over G_i x (0,L) into one extension over M' x (0,L).

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sobolev_glue/core.hpp"

namespace sobolev_glue {

enum class BaseManifold { Circle, Torus };

std::string_view to_string(BaseManifold base);
BaseManifold base_manifold_from_string(std::string_view name);

/// Chart i: G_i is the open arc (S^1) or geodesic disc (T^2) of radius
/// `half_width` around `center`; W_i the concentric one of radius
/// `w_half_width`. Psi_i(b) = (b - center) / half_width.
struct Chart {
  std::array<double, 2> center{};
  double half_width = 0.0;
  double w_half_width = 0.0;
};

class Covering {
 public:
  /// K >= 2 arcs of length 3*pi/K on S^1; K = k^2 (k >= 2) discs of radius
  /// 0.9/k on the (1/k)-lattice of T^2.
  static Covering build(BaseManifold base, int charts);
  /// One patch over the whole manifold (no chart maps); gluing is the identity.
  static Covering single(BaseManifold base);

  BaseManifold base() const noexcept { return base_; }
  bool is_single() const noexcept { return single_; }
  /// Dimension of the base, m - 1 in the collar M' x (0,1).
  int chart_dim() const noexcept { return base_ == BaseManifold::Circle ? 1 : 2; }
  int size() const noexcept { return single_ ? 1 : static_cast<int>(charts_.size()); }
  const Chart& chart(int i) const { return charts_.at(static_cast<std::size_t>(i)); }
  /// Period of each base axis.
  double period() const noexcept { return base_ == BaseManifold::Circle ? kTwoPi : 1.0; }

  /// Base coordinates unwrapped to lie within half a period of the chart center.
  void unwrap(int i, std::span<const double> b, std::span<double> out) const;
  /// Psi_i(b); false if b is outside W_i.
  bool to_chart(int i, std::span<const double> b, std::span<double> z) const;
  /// Psi_i^{-1}(z) in unwrapped base coordinates.
  void from_chart(int i, std::span<const double> z, std::span<double> b) const;
  /// b in the open set G_i.
  bool in_chart_set(int i, std::span<const double> b) const;
  /// Geodesic distance from b to the center of chart i.
  double chart_distance(int i, std::span<const double> b) const;

  /// Box axes of the patch grid over the bounding box of G_i, `counts` nodes per base axis.
  std::vector<Axis> patch_base_axes(int i, std::span<const int> counts) const;
  /// Patch node counts matching the spacing of a global base grid.
  std::vector<int> patch_counts(int i, const DomainSpec& base_grid) const;
  /// Lip(Psi_i) * Lip(Psi_i^{-1}) over G_i.
  double distortion(int i) const;

  /// Sampled union check over the nodes of `base_grid`.
  bool covers(const DomainSpec& base_grid) const;

 private:
  BaseManifold base_ = BaseManifold::Circle;
  bool single_ = false;
  std::vector<Chart> charts_;
};

/// Phi(z', z_m) = (1 - z_m r) z' for a unit vector z'.
std::vector<double> radial_fold_map(std::span<const double> direction, double z_m, double r);

/// Builds a patch over closure(G_i) x (0, depth) by sampling fn(b, t, out),
/// with b in unwrapped base coordinates.
template <class Fn>
GridMap make_patch(const Covering& covering, int i, std::span<const int> base_counts,
                   const Axis& depth_axis, const TargetSpec& target, Fn&& fn) {
  std::vector<Axis> axes = covering.patch_base_axes(i, base_counts);
  axes.push_back(depth_axis);
  const DomainSpec domain = DomainSpec::box(axes);
  const int m = covering.chart_dim();
  return sample_map<GridMap>(domain, target, [&](std::span<const double> x, std::span<double> out) {
    fn(x.first(m), x[m], out);
  });
}

struct GlueOptions {
  double p = 2.0;
  std::optional<double> tol;      // trace compatibility tolerance, default 10 h
  int ladder_steps = 64;
  double max_radius = 0.5;        // fold radius cap, keeps the annulus resolved
  std::optional<int> chart_res;   // chart sampling resolution
  bool abort_on_gap = true;       // covering-invariant gaps abort, else are counted
};

struct GlueStep {
  int chart = 0;
  double r = 0.0;
  std::size_t cone_size = 0;
  int direction_res = 0;
  std::size_t fold_nodes = 0;       // base nodes inside the folded annulus
  std::size_t inner_nodes = 0;      // base nodes in Psi^{-1}(B_r)
  std::size_t dropped_nodes = 0;    // annulus nodes outside the cone
  std::size_t invalid_samples = 0;  // V_{i-1} reads touching nodes outside H_{i-1}
  std::size_t coverage_gaps = 0;
  double trace_error = 0.0;         // bottom trace of V_i vs u over H_i
};

struct GlueReport {
  std::vector<GlueStep> steps;
  std::vector<double> patch_energies;
  std::vector<double> distortions;
  double energy = 0.0;
  double patch_energy_sum = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
  double trace_error = 0.0;
  double constraint_violation = 0.0;
  double p = 2.0;
};

/// Runs the chart-by-chart induction. Throws PreconditionError when patch
/// traces disagree with u or with each other, ResolutionError when a step
/// finds no cone at the sampling resolution or the covering invariant breaks.
std::pair<GridMap, GlueReport> glue(const Covering& covering, const std::vector<GridMap>& patches,
                                    const TraceMap& u, const GlueOptions& options = {});

struct GlueVerification {
  double trace_error = 0.0;
  double energy = 0.0;
  double patch_energy_sum = 0.0;
  double ratio = 0.0;
  bool degenerate = false;  // 0/0 energies; ratio is NaN
};

GlueVerification verify_glue(const GridMap& glued, const TraceMap& u, const Covering& covering,
                             const std::vector<GridMap>& patches, double p);

/// `key=value` lines including every r_i.
std::string format_glue_report(const GlueReport& report);

}  // namespace sobolev_glue
