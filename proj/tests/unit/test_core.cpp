#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sobolev_glue/core.hpp"
#include "sobolev_glue/errors.hpp"

using namespace sobolev_glue;

TEST_CASE("axis spacing follows periodicity") {
  CHECK(Axis{0.0, 1.0, 5, false}.spacing() == doctest::Approx(0.25));
  CHECK(Axis{0.0, 1.0, 4, true}.spacing() == doctest::Approx(0.25));
  CHECK(Axis{0.0, 1.0, 4, true}.cells() == 4);
  CHECK(Axis{0.0, 1.0, 4, false}.cells() == 3);
}

TEST_CASE("domain factories and flattening") {
  const DomainSpec d = DomainSpec::collar_circle(8, 5, 2.0);
  CHECK(d.kind() == DomainKind::CollarCircle);
  CHECK(d.node_count() == 40);
  CHECK(d.cell_count() == 32);
  CHECK(d.axis(1).length == 2.0);
  std::vector<int> idx{3, 2};
  CHECK(d.flat_index(idx) == 3 * 5 + 2);
  std::vector<int> wrapped{11, 2};
  CHECK(d.flat_index(wrapped) == 3 * 5 + 2);
  std::vector<int> bad{0, 5};
  CHECK_THROWS_AS(d.flat_index(bad), DomainError);
  std::vector<int> back(2);
  d.multi_index(17, back);
  CHECK(back == std::vector<int>{3, 2});
}

TEST_CASE("trapezoid node weights integrate the volume") {
  for (const DomainSpec& d : {DomainSpec::interval(9), DomainSpec::circle(16), DomainSpec::square2d(7, 5),
                              DomainSpec::collar_torus(4, 6, 3, 0.5), DomainSpec::cube3d(6, 4, 5)}) {
    double sum = 0.0;
    for (std::size_t n = 0; n < d.node_count(); ++n) sum += d.node_weight(n);
    CHECK(sum == doctest::Approx(d.volume()).epsilon(1e-12));
    CHECK(d.cell_volume() * d.cell_count() == doctest::Approx(d.volume()).epsilon(1e-12));
  }
}

TEST_CASE("domain kinds round trip through names") {
  for (auto k : {DomainKind::Interval, DomainKind::Circle, DomainKind::Torus, DomainKind::Square2D,
                 DomainKind::Cube3D, DomainKind::CollarCircle, DomainKind::CollarTorus, DomainKind::Box})
    CHECK(domain_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(domain_kind_from_string("sphere"), ParameterError);
}

TEST_CASE("target projection and distance") {
  const TargetSpec s = TargetSpec::sphere(3);
  std::vector<double> y{0.0, 3.0, 4.0};
  CHECK(s.distance(y) == doctest::Approx(4.0));
  s.project(y);
  CHECK(y[1] == doctest::Approx(0.6));
  CHECK(y[2] == doctest::Approx(0.8));
  std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(TargetSpec::circle().project(zero), SingularityError);
  std::vector<double> e{2.0, -1.0};
  CHECK(project_to_target(e, TargetSpec::euclidean(2)) == e);
  CHECK(TargetSpec::euclidean(2).distance(e) == 0.0);
  CHECK_THROWS_AS(TargetSpec(TargetKind::Circle, 3), ParameterError);
}

TEST_CASE("maps validate values and the manifold constraint") {
  const DomainSpec d = DomainSpec::circle(128);
  std::vector<double> v(256, 0.0);
  CHECK_THROWS_AS(GridMap(d, TargetSpec::circle(), v), PreconditionError);
  CHECK_NOTHROW(GridMap(d, TargetSpec::circle(), v, 2.0));
  for (int i = 0; i < 128; ++i) v[2 * i] = 1.0;
  CHECK_NOTHROW(GridMap(d, TargetSpec::circle(), v));
  v[3] = std::nan("");
  CHECK_THROWS_AS(GridMap(d, TargetSpec::circle(), v), ParameterError);
  CHECK_THROWS_AS(GridMap(d, TargetSpec::circle(), std::vector<double>(255, 1.0)), ParameterError);
}

TEST_CASE("multilinear evaluation reproduces affine maps and wraps periodic axes") {
  const DomainSpec d = DomainSpec::square2d(5, 9);
  const GridMap m = sample_map<GridMap>(d, TargetSpec::euclidean(1), [](auto x, auto out) {
    out[0] = 2.0 * x[0] - 3.0 * x[1] + 1.0;
  });
  std::vector<double> p{0.37, 0.81};
  CHECK(m.evaluate(p)[0] == doctest::Approx(2.0 * 0.37 - 3.0 * 0.81 + 1.0));
  std::vector<double> out_of_range{1.2, 0.5};
  CHECK_THROWS_AS(m.evaluate(out_of_range), DomainError);

  const DomainSpec c = DomainSpec::circle(16);
  const GridMap w = sample_map<GridMap>(c, TargetSpec::euclidean(1), [](auto x, auto out) { out[0] = std::sin(x[0]); });
  std::vector<double> a{0.3}, b{0.3 + kTwoPi};
  CHECK(w.evaluate(a)[0] == doctest::Approx(w.evaluate(b)[0]));
}

TEST_CASE("trace extraction and boundary replacement") {
  const DomainSpec d = DomainSpec::collar_circle(8, 4);
  const GridMap m = sample_map<GridMap>(d, TargetSpec::euclidean(1), [](auto x, auto out) { out[0] = x[0] + 10 * x[1]; });
  const TraceMap bottom = extract_trace(m, d.bottom_face());
  CHECK(bottom.domain().kind() == DomainKind::Circle);
  for (std::size_t n = 0; n < bottom.domain().node_count(); ++n)
    CHECK(bottom.node(n)[0] == doctest::Approx(kTwoPi * n / 8));
  CHECK_THROWS_AS(extract_trace(m, Face{0, false}), DomainError);

  const TraceMap zero(bottom.domain(), bottom.target(), std::vector<double>(8, 0.0));
  const GridMap replaced = set_boundary(m, d.bottom_face(), zero);
  CHECK(sup_distance(extract_trace(replaced, d.bottom_face()), zero) == 0.0);
  const TraceMap top = extract_trace(replaced, Face{1, true});
  CHECK(top.node(0)[0] == doctest::Approx(10.0));
}
