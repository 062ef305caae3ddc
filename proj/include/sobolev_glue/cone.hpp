#pragma once

// Sampled cone certificates: for a closed F in the closed unit ball and an
// open G with F ∩ ∂B_1 ⊆ G, find a radius r and a cone C of directions with
// F \ B_r ⊆ C ∩ (B̄_1 \ B_r) ⊆ G on grid samples.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sobolev_glue {

/// Indicator of a set on the regular grid of [-1,1]^m, m in {1,2}.
class SampledSet {
 public:
  SampledSet(int m, int res, bool open, std::vector<std::uint8_t> bits);

  static SampledSet from_predicate(int m, int res, bool open,
                                   const std::function<bool(std::span<const double>)>& pred);

  int dimension() const noexcept { return m_; }
  int resolution() const noexcept { return res_; }
  bool is_open() const noexcept { return open_; }
  double spacing() const noexcept { return 2.0 / (res_ - 1); }
  double coord(int i) const noexcept { return -1.0 + i * spacing(); }
  std::size_t node_count() const noexcept { return bits_.size(); }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  bool at(std::size_t flat) const { return bits_[flat] != 0; }
  void node_coords(std::size_t flat, std::span<double> x) const;
  /// Membership of the grid node nearest to x; false outside the grid.
  bool contains_nearest(std::span<const double> x) const;
  /// Node in the set together with all of its in-grid neighbours.
  bool interior(std::size_t flat) const;

 private:
  int m_;
  int res_;
  bool open_;
  std::vector<std::uint8_t> bits_;
};

/// Cone directions on a regular grid: angles 2*pi*k/n for m = 2, the two
/// signs {-1, +1} for m = 1 (direction_res == 2).
struct ConeCertificate {
  int m = 2;
  int direction_res = 0;
  std::vector<std::uint8_t> directions;
  /// Directions outside the cone that border it (m = 2 only).
  std::vector<std::uint8_t> margin;
  double r = 0.5;
  bool verified = false;

  /// Direction bin of a nonzero point.
  int bin_of(std::span<const double> x) const;
  std::size_t cone_size() const;
};

int default_direction_res(int m, int set_res);

/// Every sampled F point within one cell of ∂B_1 lies in G's sampled interior.
bool check_boundary_containment(const SampledSet& F, const SampledSet& G);

/// The cone C_r: directions whose rays over [r, 1], widened by one direction
/// bin on each side, stay inside G at quarter-cell sampling.
std::vector<std::uint8_t> cone_directions(const SampledSet& G, double r, int direction_res);

struct ConeOptions {
  int ladder_steps = 64;
  std::optional<int> direction_res;
  std::optional<double> max_radius;  // prefer ladder radii up to this value
};

/// Largest r on the ladder 1 - k/K (k = 1..K-1), up to max_radius if set,
/// whose cone captures F \ B_r and passes verify_cone. Throws
/// PreconditionError if the boundary hypothesis fails, ResolutionError if no
/// ladder radius works.
ConeCertificate find_cone(const SampledSet& F, const SampledSet& G,
                          const ConeOptions& options = {});

/// Brute-force node check of both inclusions.
bool verify_cone(const SampledSet& F, const SampledSet& G, const ConeCertificate& cert);

std::string serialize_set(const SampledSet& set);
SampledSet parse_set(const std::string& text);
std::string serialize_cone(const ConeCertificate& cert);
ConeCertificate parse_cone(const std::string& text);

}  // namespace sobolev_glue
