#pragma once

// Discretized domains, manifold targets and node-sampled maps.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sobolev_glue {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// One grid axis. Non-periodic axes carry `count` nodes spanning
/// [origin, origin + length]; periodic axes carry `count` nodes on the circle
/// of circumference `length`, node `count` identified with node 0.
struct Axis {
  double origin = 0.0;
  double length = 1.0;
  int count = 2;
  bool periodic = false;

  double spacing() const noexcept {
    return periodic ? length / count : length / (count - 1);
  }
  double coord(int i) const noexcept { return origin + i * spacing(); }
  /// Number of cells along the axis.
  int cells() const noexcept { return periodic ? count : count - 1; }

  friend bool operator==(const Axis&, const Axis&) = default;
};

enum class DomainKind {
  Interval,      // [0,1]
  Circle,        // S^1 of length 2*pi
  Torus,         // flat unit torus
  Square2D,      // (0,1)^2
  Cube3D,        // W x (0,1)^2, W a periodic circle grid
  CollarCircle,  // S^1 x (0,L)
  CollarTorus,   // T^2 x (0,L)
  Box,           // arbitrary product of axes (chart patches)
};

std::string_view to_string(DomainKind kind);
DomainKind domain_kind_from_string(std::string_view name);

/// Face of a product grid: the low or high end of a non-periodic axis.
struct Face {
  int axis = 0;
  bool high = false;
  friend bool operator==(const Face&, const Face&) = default;
};

class DomainSpec {
 public:
  DomainSpec() = default;
  DomainSpec(DomainKind kind, std::vector<Axis> axes);

  static DomainSpec interval(int n);
  static DomainSpec circle(int n);
  static DomainSpec torus(int n0, int n1);
  static DomainSpec square2d(int n0, int n1);
  static DomainSpec cube3d(int n_w, int n0, int n1);
  static DomainSpec collar_circle(int n_theta, int n_depth, double depth = 1.0);
  static DomainSpec collar_torus(int n0, int n1, int n_depth, double depth = 1.0);
  static DomainSpec box(std::vector<Axis> axes);

  DomainKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return static_cast<int>(axes_.size()); }
  const Axis& axis(int k) const { return axes_.at(static_cast<std::size_t>(k)); }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::vector<int> resolution() const;

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t cell_count() const noexcept;
  double cell_volume() const noexcept;
  double max_spacing() const noexcept;
  /// Total measure of the domain.
  double volume() const noexcept;

  /// Row-major flattening, last axis fastest.
  std::size_t flat_index(std::span<const int> idx) const;
  void multi_index(std::size_t flat, std::span<int> idx) const;
  std::size_t stride(int k) const { return strides_.at(static_cast<std::size_t>(k)); }
  void node_coords(std::size_t flat, std::span<double> x) const;
  /// Trapezoidal weight of a node (half cells on non-periodic ends).
  double node_weight(std::size_t flat) const;

  bool is_valid_face(const Face& face) const noexcept;
  /// Grid of the face obtained by dropping `face.axis`.
  DomainSpec face_domain(const Face& face) const;
  /// The bottom face is the low end of the last axis.
  Face bottom_face() const noexcept { return Face{dimension() - 1, false}; }

  friend bool operator==(const DomainSpec& a, const DomainSpec& b) {
    return a.kind_ == b.kind_ && a.axes_ == b.axes_;
  }

 private:
  DomainKind kind_ = DomainKind::Box;
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t node_count_ = 0;
};

enum class TargetKind { Euclidean, Circle, Sphere };

std::string_view to_string(TargetKind kind);
TargetKind target_kind_from_string(std::string_view name);

/// The target manifold N, isometrically embedded in R^nu.
class TargetSpec {
 public:
  TargetSpec() = default;
  TargetSpec(TargetKind kind, int nu);

  static TargetSpec euclidean(int nu) { return {TargetKind::Euclidean, nu}; }
  static TargetSpec circle() { return {TargetKind::Circle, 2}; }
  static TargetSpec sphere(int nu) { return {TargetKind::Sphere, nu}; }

  TargetKind kind() const noexcept { return kind_; }
  int nu() const noexcept { return nu_; }
  bool is_manifold() const noexcept { return kind_ != TargetKind::Euclidean; }

  /// Distance from y to N.
  double distance(std::span<const double> y) const;
  /// Nearest-point retraction onto N, in place. Throws SingularityError at 0.
  void project(std::span<double> y) const;

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;

 private:
  TargetKind kind_ = TargetKind::Euclidean;
  int nu_ = 1;
};

std::vector<double> project_to_target(std::span<const double> y,
                                      const TargetSpec& target);

/// Default manifold-constraint tolerance: 10 grid spacings.
double default_constraint_tol(const DomainSpec& domain);

/// Node-sampled map from a product grid into R^nu. Immutable once built.
class NodeField {
 public:
  NodeField(DomainSpec domain, TargetSpec target, std::vector<double> values,
            std::optional<double> constraint_tol = std::nullopt);

  const DomainSpec& domain() const noexcept { return domain_; }
  const TargetSpec& target() const noexcept { return target_; }
  int nu() const noexcept { return target_.nu(); }
  double constraint_tol() const noexcept { return constraint_tol_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> node(std::size_t flat) const {
    return std::span<const double>(values_).subspan(flat * nu(), nu());
  }
  /// Largest dist(value, N) over all nodes.
  double max_constraint_violation() const;

  /// Multilinear interpolation at `point`; raw interpolant, never projected.
  std::vector<double> evaluate(std::span<const double> point) const;
  void evaluate_into(std::span<const double> point, std::span<double> out) const;

 protected:
  DomainSpec domain_;
  TargetSpec target_;
  std::vector<double> values_;
  double constraint_tol_;
};

class GridMap : public NodeField {
 public:
  using NodeField::NodeField;
};

/// Boundary map u = tr U on a face or on the base manifold.
class TraceMap : public NodeField {
 public:
  using NodeField::NodeField;
  const DomainSpec& base() const noexcept { return domain(); }
};

/// Builds a map by sampling `fn(x, out)` at every node.
template <class Map, class Fn>
Map sample_map(const DomainSpec& domain, const TargetSpec& target, Fn&& fn,
               std::optional<double> constraint_tol = std::nullopt) {
  std::vector<double> values(domain.node_count() * target.nu());
  std::vector<double> x(domain.dimension());
  for (std::size_t n = 0; n < domain.node_count(); ++n) {
    domain.node_coords(n, x);
    fn(std::span<const double>(x),
       std::span<double>(values).subspan(n * target.nu(), target.nu()));
  }
  return Map(domain, target, std::move(values), constraint_tol);
}

std::vector<double> evaluate(const NodeField& map, std::span<const double> point);

TraceMap extract_trace(const GridMap& map, const Face& face);
/// Overwrites the node layer of `face` with `trace`.
GridMap set_boundary(const GridMap& map, const Face& face, const TraceMap& trace);

/// Sup-norm distance between two maps on the same grid.
double sup_distance(const NodeField& a, const NodeField& b);

}  // namespace sobolev_glue
