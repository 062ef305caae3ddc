#include <doctest.h>

#include <cmath>

#include "sobolev_glue/acceptance.hpp"
#include "sobolev_glue/energy.hpp"
#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/folding.hpp"

using namespace sobolev_glue;

namespace {

GridMap linear_in_depth(int n, double a, double b) {
  return sample_map<GridMap>(DomainSpec::square2d(n, n), TargetSpec::euclidean(2), [&](auto x, auto out) {
    out[0] = x[1] * a;
    out[1] = x[1] * b;
  });
}

}  // namespace

TEST_CASE("fold regions and source coordinates") {
  CHECK(classify_region(0.1, 0.5) == FoldRegion::Sigma0);
  CHECK(classify_region(0.25, 0.5) == FoldRegion::Sigma0);
  CHECK(classify_region(0.4, 0.5) == FoldRegion::SigmaSharp);
  CHECK(classify_region(0.5, 0.5) == FoldRegion::SigmaSharp);
  CHECK(classify_region(0.6, 0.5) == FoldRegion::Sigma1);
  const FoldSource s0 = fold_source(0.1, 0.5);
  CHECK_FALSE(s0.from_u1);
  CHECK(s0.x1 == doctest::Approx(0.2));
  CHECK(s0.x2 == doctest::Approx(0.3));
  const FoldSource sh = fold_source(0.4, 0.5);
  CHECK(sh.from_u1);
  CHECK(sh.x1 == doctest::Approx(0.5));
  CHECK(sh.x2 == doctest::Approx(0.3));
  const FoldSource s1 = fold_source(0.7, 0.2);
  CHECK(s1.from_u1);
  CHECK(s1.x1 == 0.7);
  CHECK(s1.x2 == 0.2);
  // The pieces agree on the interfaces.
  const FoldSource a = fold_source(0.25, 0.5);
  CHECK(a.x2 == doctest::Approx(0.0));
  const FoldSource b = fold_source(0.3, 0.3);
  CHECK(b.x1 == doctest::Approx(0.3));
  CHECK(b.x2 == doctest::Approx(0.3));
}

TEST_CASE("folding two depth-linear maps gives the piecewise affine map") {
  const int n = 129;
  const GridMap u0 = linear_in_depth(n, 1.0, 0.0), u1 = linear_in_depth(n, 0.0, 2.0);
  const auto [folded, rep] = fold(u0, u1, FoldOptions{});
  CHECK(rep.trace_bottom_error == doctest::Approx(0.0));
  CHECK(rep.trace_left_error == doctest::Approx(0.0));
  CHECK(rep.trace_right_error == doctest::Approx(0.0));
  std::vector<double> x(2);
  for (std::size_t k = 0; k < folded.domain().node_count(); k += 37) {
    folded.domain().node_coords(k, x);
    auto v = folded.node(k);
    switch (classify_region(x[0], x[1])) {
      case FoldRegion::Sigma0:
        CHECK(v[0] == doctest::Approx(x[1] - 2 * x[0]));
        CHECK(v[1] == doctest::Approx(0.0));
        break;
      case FoldRegion::SigmaSharp:
        CHECK(v[0] == doctest::Approx(0.0));
        CHECK(v[1] == doctest::Approx(2.0 * (2 * x[0] - x[1])));
        break;
      case FoldRegion::Sigma1:
        CHECK(v[1] == doctest::Approx(2.0 * x[1]));
        break;
    }
  }
  // Exact piecewise integration: 5/4 |v|^2 + 5/4 |w|^2 + 1/2 |w|^2.
  const double exact = 1.25 * 1.0 + 1.25 * 4.0 + 0.5 * 4.0;
  CHECK(std::abs(rep.energy_out - exact) < 30.0 / (n - 1));
  CHECK(rep.energy_in_0 == doctest::Approx(1.0));
  CHECK(rep.energy_in_1 == doctest::Approx(4.0));
}

TEST_CASE("fold rejects mismatched bottom traces") {
  const GridMap u0 = linear_in_depth(33, 1.0, 0.0);
  const GridMap shifted = sample_map<GridMap>(u0.domain(), u0.target(), [](auto x, auto out) {
    out[0] = 1.0 + x[1];
    out[1] = 0.0;
  });
  CHECK_THROWS_AS(fold(u0, shifted), PreconditionError);
  CHECK_NOTHROW(fold(u0, shifted, FoldOptions{2.0, 2.0}));
  const GridMap other = linear_in_depth(17, 1.0, 0.0);
  CHECK_THROWS_AS(fold(u0, other), DomainError);
}

TEST_CASE("fold of manifold-valued maps stays on the manifold") {
  const DomainSpec d = DomainSpec::square2d(65, 65);
  auto make = [&](double k) {
    return sample_map<GridMap>(d, TargetSpec::circle(), [&](auto x, auto out) {
      const double a = 2.0 * x[0] + k * x[1] * x[0];
      out[0] = std::cos(a);
      out[1] = std::sin(a);
    });
  };
  const auto [folded, rep] = fold(make(1.0), make(-2.0));
  CHECK(folded.max_constraint_violation() < 1e-12);
  CHECK(rep.constraint_violation >= 0.0);
}

TEST_CASE("fold energy bounds come from the Jacobian singular values") {
  // Largest eigenvalues of J^T J for [[2,0],[-2,1]] and [[0,1],[2,-1]].
  auto top_eig = [](double a, double b, double c, double d) {
    const double t = a * a + b * b + c * c + d * d, det = a * d - b * c;
    return 0.5 * (t + std::sqrt(t * t - 4 * det * det));
  };
  const double s0 = top_eig(2, 0, -2, 1), ss = top_eig(0, 1, 2, -1);
  CHECK(s0 == doctest::Approx((9 + std::sqrt(65.0)) / 2));
  CHECK(ss == doctest::Approx((6 + std::sqrt(20.0)) / 2));
  for (double p : {1.5, 2.0, 3.0}) {
    CHECK(fold_energy_bound_max(p) == doctest::Approx(std::max(std::pow(s0, p / 2), std::pow(ss, p / 2)) / 2 + 1));
    CHECK(fold_energy_bound_sum(p) == doctest::Approx((std::pow(s0, p / 2) + std::pow(ss, p / 2)) / 2 + 1));
  }
}

TEST_CASE("independent trace verification agrees with the fold report") {
  const auto [u0, u1] = random_fold_pair(65, 3, 42);
  const auto [folded, rep] = fold(u0, u1, FoldOptions{std::nullopt, 1.5});
  const FoldReport check = verify_fold_traces(folded, u0, u1, 1.5);
  CHECK(check.trace_bottom_error == doctest::Approx(rep.trace_bottom_error));
  CHECK(check.trace_left_error == doctest::Approx(rep.trace_left_error));
  CHECK(check.trace_right_error == doctest::Approx(rep.trace_right_error));
  CHECK(check.ratio == doctest::Approx(rep.ratio));
  CHECK(rep.ratio <= fold_energy_bound_max(1.5));
}

TEST_CASE("fold carries a leading periodic axis") {
  const DomainSpec d = DomainSpec::cube3d(8, 17, 17);
  auto make = [&](double k) {
    return sample_map<GridMap>(d, TargetSpec::euclidean(1), [&](auto x, auto out) {
      out[0] = std::sin(x[0]) + x[2] * (k + x[1]);
    });
  };
  const auto [folded, rep] = fold(make(1.0), make(3.0));
  CHECK(rep.trace_bottom_error < 1e-12);
  CHECK(rep.trace_left_error < 1e-12);
  CHECK(rep.trace_right_error < 1e-12);
}
