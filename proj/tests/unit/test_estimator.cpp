#include <doctest.h>

#include <cmath>

#include "sobolev_glue/acceptance.hpp"
#include "sobolev_glue/energy.hpp"
#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/estimator.hpp"

using namespace sobolev_glue;

namespace {

TraceMap constant_circle_trace(int n) {
  return sample_map<TraceMap>(DomainSpec::circle(n), TargetSpec::circle(), [](auto, auto out) {
    out[0] = 1.0;
    out[1] = 0.0;
  });
}

}  // namespace

TEST_CASE("collar domain appends a depth axis") {
  const DomainSpec d = collar_domain(DomainSpec::circle(16), 5, 0.5);
  CHECK(d.kind() == DomainKind::CollarCircle);
  CHECK(d.dimension() == 2);
  CHECK(d.axis(1).count == 5);
  CHECK(d.axis(1).length == 0.5);
  CHECK_FALSE(d.axis(1).periodic);
}

TEST_CASE("constant trace extends with zero energy") {
  MinimizeConfig cfg;
  const MinimizeResult r = minimize_extension(constant_circle_trace(32), 9, 1.0, cfg);
  CHECK(r.energy == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.map.max_constraint_violation() < 1e-12);
}

TEST_CASE("descent log is monotone and the bottom stays pinned") {
  const TraceMap u = circle_degree_trace(48, 1);
  MinimizeConfig cfg;
  cfg.max_iterations = 300;
  cfg.init_noise = 0.05;
  cfg.seed = 7;
  const MinimizeResult r = minimize_extension(u, 9, 1.0, cfg);
  double last = INFINITY;
  for (const StepRecord& s : r.log) {
    if (!s.accepted) continue;
    CHECK(s.energy <= last);
    last = s.energy;
  }
  const TraceMap bottom = extract_trace(r.map, r.map.domain().bottom_face());
  CHECK(sup_distance(bottom, u) == 0.0);
  CHECK(r.map.max_constraint_violation() < 1e-12);
  // The radial-constant start has energy close to 2 pi; descent only lowers it.
  CHECK(r.energy < kTwoPi * 1.01);
  CHECK(r.energy > 0.0);
}

TEST_CASE("same seed gives identical results") {
  const TraceMap u = circle_degree_trace(32, 1);
  MinimizeConfig cfg;
  cfg.max_iterations = 50;
  cfg.init_noise = 0.1;
  cfg.seed = 3;
  const MinimizeResult a = minimize_extension(u, 5, 1.0, cfg);
  const MinimizeResult b = minimize_extension(u, 5, 1.0, cfg);
  CHECK(a.energy == b.energy);
  CHECK(sup_distance(a.map, b.map) == 0.0);
}

TEST_CASE("fixed oversized step reports an optimization error") {
  MinimizeConfig cfg;
  cfg.backtracking = false;
  cfg.step = 1e3;
  cfg.projection = ProjectionMode::None;
  cfg.max_iterations = 20;
  const TraceMap u = circle_degree_trace(32, 1);
  CHECK_THROWS_AS(minimize_extension(u, 5, 1.0, cfg), OptimizationError);
}

TEST_CASE("penalized descent on a constant trace stays at zero") {
  const TraceMap u = constant_circle_trace(32);
  const PenaltySpec pen = PenaltySpec::distance_power(TargetSpec::circle(), 0.5, 2.0);
  const MinimizeResult r = minimize_penalized(u, pen, 9, 1.0, MinimizeConfig{});
  CHECK(r.energy == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("lifting oracle on constant and degree traces") {
  const OracleResult zero = circle_lifting_oracle(constant_circle_trace(64), 9);
  CHECK(zero.degree == 0);
  CHECK(zero.energy == doctest::Approx(0.0).epsilon(1e-14));

  const OracleResult two = circle_lifting_oracle(circle_degree_trace(256, 2), 9);
  CHECK(two.degree == 2);
  CHECK(two.energy == doctest::Approx(4.0 * kTwoPi).epsilon(1e-3));
  CHECK(two.map.max_constraint_violation() < 1e-12);
}

TEST_CASE("winding number and lifting failures") {
  CHECK(winding_number(circle_degree_trace(64, 3)) == 3);
  CHECK(winding_number(circle_degree_trace(64, -1)) == -1);
  CHECK(winding_number(random_degree_zero_trace(128, 5)) == 0);
  // Eight nodes of a degree-4 trace jump by exactly pi.
  CHECK_THROWS_AS(circle_lifting_oracle(circle_degree_trace(8, 4), 5), LiftingError);
}

TEST_CASE("minimize config parsing") {
  const MinimizeConfig c = parse_minimize_config(
      "# comment\np = 3\nmax_iterations = 12\nbacktracking = false\nstep = 0.25\n"
      "projection = none\nseed = 9\n");
  CHECK(c.p == 3.0);
  CHECK(c.max_iterations == 12);
  CHECK_FALSE(c.backtracking);
  CHECK(c.step == 0.25);
  CHECK(c.projection == ProjectionMode::None);
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(parse_minimize_config("bogus = 1\n"), ParameterError);
  CHECK_THROWS_AS(parse_minimize_config("p = 0.5\n"), ParameterError);
}

TEST_CASE("sweep over a constant trace is bounded and vanishing") {
  MinimizeConfig cfg;
  cfg.max_iterations = 50;
  const SweepResult s =
      isobe_sweep(constant_circle_trace(32), 2.0, {0.5, 0.25}, {1.0, 0.5}, 9, cfg);
  REQUIRE(s.points.size() == 4);
  REQUIRE(s.limsup_by_depth.size() == 2);
  CHECK(s.bounded_in_eps);
  CHECK(s.vanishing_in_depth);
  for (const SweepPoint& pt : s.points) CHECK(pt.energy == doctest::Approx(0.0).epsilon(1e-14));
}
