#include <doctest.h>

#include <cmath>

#include "sobolev_glue/acceptance.hpp"
#include "sobolev_glue/covering.hpp"
#include "sobolev_glue/energy.hpp"
#include "sobolev_glue/errors.hpp"

using namespace sobolev_glue;

namespace {

std::vector<GridMap> cylinders(const Covering& cov, const TraceMap& u, const Axis& depth,
                               double scale = 1.0) {
  std::vector<GridMap> patches;
  for (int i = 0; i < cov.size(); ++i) {
    const auto counts = cov.patch_counts(i, u.domain());
    patches.push_back(make_patch(cov, i, counts, depth, u.target(), [&](auto b, double t, auto out) {
      u.evaluate_into(b, out);
      if (u.target().is_manifold()) u.target().project(out);
      for (auto& v : out) v *= scale;
      if (!u.target().is_manifold()) out[0] += scale * t * std::sin(3.0 * b[0]);
    }));
  }
  return patches;
}

}  // namespace

TEST_CASE("circle coverings") {
  CHECK_THROWS_AS(Covering::build(BaseManifold::Circle, 1), ParameterError);
  for (int K : {2, 3, 5}) {
    const Covering c = Covering::build(BaseManifold::Circle, K);
    CHECK(c.size() == K);
    CHECK(c.covers(DomainSpec::circle(200)));
    CHECK(c.distortion(0) == 1.0);
    std::vector<double> b{c.chart(K - 1).center[0] + 0.3}, z(1), back(1);
    REQUIRE(c.to_chart(K - 1, b, z));
    CHECK(z[0] == doctest::Approx(0.3 / c.chart(K - 1).half_width));
    c.from_chart(K - 1, z, back);
    CHECK(back[0] == doctest::Approx(b[0]));
  }
  const Covering c2 = Covering::build(BaseManifold::Circle, 2);
  std::vector<double> near_wrap{kTwoPi - 0.1}, z(1);
  REQUIRE(c2.to_chart(0, near_wrap, z));
  CHECK(z[0] < 0.0);
  CHECK(c2.in_chart_set(0, near_wrap));
}

TEST_CASE("torus coverings need a square number of charts") {
  CHECK_THROWS_AS(Covering::build(BaseManifold::Torus, 3), ParameterError);
  CHECK_THROWS_AS(Covering::build(BaseManifold::Torus, 1), ParameterError);
  const Covering c = Covering::build(BaseManifold::Torus, 9);
  CHECK(c.size() == 9);
  CHECK(c.covers(DomainSpec::torus(30, 30)));
  CHECK(c.distortion(4) == 1.0);
  std::vector<double> corner{c.chart(4).center[0] + 0.15, c.chart(4).center[1] + 0.15};
  CHECK(c.in_chart_set(4, corner));
  CHECK(c.chart_distance(4, corner) == doctest::Approx(std::sqrt(0.045)));
  std::vector<double> b{c.chart(4).center[0] + 0.05, c.chart(4).center[1] - 0.1}, z(2), back(2);
  REQUIRE(c.to_chart(4, b, z));
  c.from_chart(4, z, back);
  CHECK(back[0] == doctest::Approx(b[0]));
  CHECK(back[1] == doctest::Approx(b[1]));
}

TEST_CASE("the radial fold map as written") {
  std::vector<double> dir{0.6, 0.8};
  const auto v = radial_fold_map(dir, 0.5, 0.4);
  CHECK(v[0] == doctest::Approx(0.6 * 0.8));
  CHECK(v[1] == doctest::Approx(0.8 * 0.8));
  std::vector<double> bad{1.0, 1.0};
  CHECK_THROWS_AS(radial_fold_map(bad, 0.5, 0.4), DomainError);
  CHECK_THROWS_AS(radial_fold_map(dir, 0.5, 1.0), ParameterError);
}

TEST_CASE("gluing cylindrical circle patches reproduces the trace") {
  for (int K : {2, 3, 4}) {
    const Covering cov = Covering::build(BaseManifold::Circle, K);
    const TraceMap u = circle_degree_trace(96, 1);
    const Axis depth{0.0, 1.0, 17, false};
    const auto [U, rep] = glue(cov, cylinders(cov, u, depth), u);
    CHECK(rep.trace_error < 1e-12);
    CHECK(rep.steps.size() == static_cast<std::size_t>(K));
    for (std::size_t i = 1; i < rep.steps.size(); ++i) {
      CHECK(rep.steps[i].r > 0.0);
      CHECK(rep.steps[i].r < 1.0);
      CHECK(rep.steps[i].coverage_gaps == 0);
      CHECK(rep.steps[i].invalid_samples == 0);
    }
    CHECK(U.max_constraint_violation() < 1e-12);
    CHECK(rep.ratio > 0.0);
    const GlueVerification v = verify_glue(U, u, cov, cylinders(cov, u, depth), 2.0);
    CHECK(v.trace_error == doctest::Approx(rep.trace_error));
    CHECK(v.ratio == doctest::Approx(rep.ratio));
    const std::string text = format_glue_report(rep);
    CHECK(text.find("r_1=") != std::string::npos);
    CHECK(text.find("ratio=") != std::string::npos);
  }
}

TEST_CASE("glue ratio does not depend on the patch scale") {
  const Covering cov = Covering::build(BaseManifold::Circle, 3);
  const TraceMap base = circle_degree_trace(64, 1);
  const TraceMap flat(base.domain(), TargetSpec::euclidean(2),
                      std::vector<double>(base.values().begin(), base.values().end()));
  std::vector<double> doubled(flat.values().begin(), flat.values().end());
  for (auto& v : doubled) v *= 2.0;
  const TraceMap flat2(flat.domain(), flat.target(), doubled);
  const Axis depth{0.0, 1.0, 9, false};
  for (double p : {1.5, 2.0, 3.0}) {
    GlueOptions opts;
    opts.p = p;
    const auto r1 = glue(cov, cylinders(cov, flat, depth, 1.0), flat, opts).second;
    const auto r2 = glue(cov, cylinders(cov, flat, depth, 2.0), flat2, opts).second;
    CHECK(r2.energy == doctest::Approx(std::pow(2.0, p) * r1.energy).epsilon(1e-10));
    CHECK(r2.ratio == doctest::Approx(r1.ratio).epsilon(1e-10));
  }
}

TEST_CASE("incompatible patches are rejected") {
  const Covering cov = Covering::build(BaseManifold::Circle, 2);
  const TraceMap u = circle_degree_trace(64, 1);
  const TraceMap v = circle_degree_trace(64, 2);
  const Axis depth{0.0, 1.0, 9, false};
  CHECK_THROWS_AS(glue(cov, cylinders(cov, v, depth), u), PreconditionError);
  auto patches = cylinders(cov, u, depth);
  patches.pop_back();
  CHECK_THROWS_AS(glue(cov, patches, u), PreconditionError);
  CHECK_THROWS_AS(glue(Covering::build(BaseManifold::Torus, 4), cylinders(cov, u, depth), u), DomainError);
}

TEST_CASE("a single chart passes the patch through") {
  const Covering cov = Covering::single(BaseManifold::Circle);
  const TraceMap u = circle_degree_trace(32, 1);
  const Axis depth{0.0, 1.0, 5, false};
  const auto patches = cylinders(cov, u, depth);
  const auto [U, rep] = glue(cov, patches, u);
  CHECK(rep.ratio == doctest::Approx(1.0));
  CHECK(sup_distance(U, patches[0]) == 0.0);
}

TEST_CASE("degenerate energies report no ratio") {
  const Covering cov = Covering::build(BaseManifold::Circle, 2);
  const TraceMap u(DomainSpec::circle(32), TargetSpec::circle(), [] {
    std::vector<double> v(64, 0.0);
    for (int i = 0; i < 32; ++i) v[2 * i] = 1.0;
    return v;
  }());
  const auto rep = glue(cov, cylinders(cov, u, Axis{0.0, 1.0, 5, false}), u).second;
  CHECK(rep.degenerate);
  CHECK(std::isnan(rep.ratio));
  CHECK(format_glue_report(rep).find("ratio=degenerate") != std::string::npos);
}

TEST_CASE("gluing over the torus") {
  const Covering cov = Covering::build(BaseManifold::Torus, 4);
  const int n = 48;
  const TraceMap u = sample_map<TraceMap>(DomainSpec::torus(n, n), TargetSpec::circle(), [](auto x, auto out) {
    const double a = kTwoPi * x[0] + 0.5 * std::sin(kTwoPi * x[1]);
    out[0] = std::cos(a);
    out[1] = std::sin(a);
  });
  const Axis depth{0.0, 1.0, 9, false};
  const auto [U, rep] = glue(cov, cylinders(cov, u, depth), u);
  CHECK(rep.trace_error <= 10.0 * u.domain().max_spacing());
  CHECK(U.max_constraint_violation() < 1e-12);
  for (const GlueStep& s : rep.steps) CHECK(s.coverage_gaps == 0);
  for (double d : rep.distortions) CHECK(d >= 1.0);
  CHECK(std::isfinite(rep.ratio));
}
