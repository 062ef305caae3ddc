#include "sobolev_glue/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "sobolev_glue/covering.hpp"
#include "sobolev_glue/energy.hpp"
#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/estimator.hpp"
#include "sobolev_glue/folding.hpp"
#include "sobolev_glue/sgf.hpp"

namespace sobolev_glue {

namespace {

class Detail {
 public:
  Detail& add(const std::string& key, double v) {
    out_ << (out_.tellp() > 0 ? " " : "") << key << '=' << format_real(v);
    return *this;
  }
  Detail& add(const std::string& key, const std::string& v) {
    out_ << (out_.tellp() > 0 ? " " : "") << key << '=' << v;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

double rel_change(double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); }

struct Trig {
  double amp, kx, ky, phase;
};

std::vector<Trig> random_terms(std::mt19937_64& rng, int count, double amp, bool two_d) {
  std::uniform_real_distribution<double> a(-amp, amp), ph(0.0, kTwoPi);
  std::uniform_int_distribution<int> k(1, 3);
  std::vector<Trig> terms;
  for (int i = 0; i < count; ++i) terms.push_back({a(rng), double(k(rng)), two_d ? double(k(rng)) : 0.0, ph(rng)});
  return terms;
}

double eval_terms(const std::vector<Trig>& terms, double x, double y) {
  double s = 0.0;
  for (const Trig& t : terms) s += t.amp * std::sin(kPi * (t.kx * x + t.ky * y) + t.phase);
  return s;
}

// 1. u(x) = x on the unit interval, s = 1/2, p = 2: the integrand is 1.
CriterionResult gagliardo_exactness() {
  const TraceMap u = sample_map<TraceMap>(DomainSpec::interval(512), TargetSpec::euclidean(1),
                                          [](auto x, auto out) { out[0] = x[0]; });
  const double v = gagliardo_energy(u, 0.5, 2.0).value;
  CriterionResult r;
  r.passed = std::abs(v - 1.0) <= 1e-3;
  r.detail = Detail().add("value", v).add("error", std::abs(v - 1.0)).str();
  return r;
}

constexpr int kFoldPairs = 50;
constexpr int kFoldGrid = 129;

// 2. Trace errors of the fold on random pairs.
CriterionResult fold_trace_contract(std::uint64_t seed) {
  const double h = 1.0 / (kFoldGrid - 1);
  double worst = 0.0;
  for (int k = 0; k < kFoldPairs; ++k) {
    const auto [u0, u1] = random_fold_pair(kFoldGrid, 2, seed + k);
    const auto [folded, rep] = fold(u0, u1, FoldOptions{std::nullopt, 2.0});
    const FoldReport check = verify_fold_traces(folded, u0, u1, 2.0);
    worst = std::max({worst, rep.trace_bottom_error, rep.trace_left_error, rep.trace_right_error,
                      check.trace_bottom_error, check.trace_left_error, check.trace_right_error});
  }
  CriterionResult r;
  r.passed = worst <= 10.0 * h;
  r.detail = Detail().add("pairs", kFoldPairs).add("max_trace_error", worst).add("limit", 10.0 * h).str();
  return r;
}

// 3. Fold energy ratio against the singular-value bound.
CriterionResult fold_energy_constant(std::uint64_t seed) {
  Detail d;
  bool ok = true;
  for (double p : {1.5, 2.0, 3.0}) {
    const double bound = fold_energy_bound_max(p);
    double worst = 0.0;
    for (int k = 0; k < kFoldPairs; ++k) {
      const auto [u0, u1] = random_fold_pair(kFoldGrid, 2, seed + k);
      const auto rep = fold(u0, u1, FoldOptions{std::nullopt, p}).second;
      worst = std::max(worst, rep.ratio);
    }
    ok = ok && worst <= bound;
    const std::string tag = p == 1.5 ? "p1.5" : p == 2.0 ? "p2" : "p3";
    d.add("max_ratio_" + tag, worst).add("bound_" + tag, bound);
  }
  CriterionResult r;
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// 4. Cone lemma on random instances and on the segment / half-plane example.
CriterionResult cone_lemma(std::uint64_t seed) {
  constexpr int kInstances = 100, kRes = 256;
  int found = 0, verified = 0, hypothesis = 0;
  double min_r = 1.0;
  for (int k = 0; k < kInstances; ++k) {
    const auto [F, G] = random_cone_instance(kRes, seed + k);
    if (!check_boundary_containment(F, G)) continue;
    ++hypothesis;
    try {
      const ConeCertificate cert = find_cone(F, G);
      ++found;
      if (cert.verified && verify_cone(F, G, cert)) ++verified;
      min_r = std::min(min_r, cert.r);
    } catch (const Error&) {
    }
  }
  const SampledSet F = SampledSet::from_predicate(2, kRes, false, [](std::span<const double> x) {
    return std::abs(x[1]) <= 0.5 * 2.0 / (kRes - 1) && x[0] >= 0.0 && x[0] <= 1.0;
  });
  const SampledSet G = SampledSet::from_predicate(2, kRes, true, [](std::span<const double> x) {
    return x[0] > 0.5;
  });
  double seg_r = 0.0;
  bool seg_ok = false;
  try {
    const ConeCertificate cert = find_cone(F, G);
    seg_r = cert.r;
    seg_ok = cert.r >= 0.6 && cert.verified && verify_cone(F, G, cert);
  } catch (const Error&) {
  }
  CriterionResult r;
  r.passed = hypothesis == kInstances && found == kInstances && verified == kInstances && seg_ok;
  r.detail = Detail()
                 .add("instances", kInstances)
                 .add("hypothesis_ok", hypothesis)
                 .add("found", found)
                 .add("verified", verified)
                 .add("min_r", min_r)
                 .add("segment_r", seg_r)
                 .str();
  return r;
}

std::vector<GridMap> cylindrical_patches(const Covering& cov, const DomainSpec& base,
                                         const Axis& depth, const TraceMap& u) {
  std::vector<GridMap> patches;
  for (int i = 0; i < cov.size(); ++i) {
    const auto counts = cov.patch_counts(i, base);
    patches.push_back(make_patch(cov, i, counts, depth, u.target(),
                                 [&](std::span<const double> b, double, std::span<double> out) {
                                   u.evaluate_into(b, out);
                                   u.target().project(out);
                                 }));
  }
  return patches;
}

// 5. Gluing cylindrical patches of the identity circle trace.
CriterionResult circle_glue() {
  Detail d;
  bool ok = true;
  for (int K : {2, 3}) {
    const Covering cov = Covering::build(BaseManifold::Circle, K);
    double ratios[2];
    int idx = 0;
    for (int n : {128, 256}) {
      const TraceMap u = circle_degree_trace(n, 1);
      const Axis depth{0.0, 1.0, n / 2, false};
      const auto patches = cylindrical_patches(cov, u.domain(), depth, u);
      const auto [U, rep] = glue(cov, patches, u, GlueOptions{});
      const double h = std::max(u.domain().max_spacing(), depth.spacing());
      const std::string tag = "K" + std::to_string(K) + "_n" + std::to_string(n);
      d.add("trace_error_" + tag, rep.trace_error).add("ratio_" + tag, rep.ratio);
      ok = ok && rep.trace_error <= 10.0 * h && std::isfinite(rep.ratio);
      ratios[idx++] = rep.ratio;
    }
    const double change = rel_change(ratios[0], ratios[1]);
    d.add("ratio_change_K" + std::to_string(K), change);
    ok = ok && change <= 0.2;
  }
  CriterionResult r;
  r.passed = ok;
  r.detail = d.str();
  return r;
}

MinimizeConfig extension_config(double p) {
  MinimizeConfig cfg;
  cfg.p = p;
  cfg.max_iterations = 20000;
  cfg.tol = 1e-10;
  cfg.patience = 20;
  return cfg;
}

// 6. Extension energies 2 pi deg^2 and the lifting oracle.
CriterionResult extension_closed_form() {
  Detail d;
  bool ok = true;
  for (int deg : {1, 2}) {
    const TraceMap u = circle_degree_trace(128, deg);
    const MinimizeResult res = minimize_extension(u, 64, 1.0, extension_config(2.0));
    const double target = kTwoPi * deg * deg;
    const double err = std::abs(res.energy - target) / target;
    const std::string tag = "deg" + std::to_string(deg);
    d.add("energy_" + tag, res.energy).add("rel_error_" + tag, err);
    ok = ok && err <= 0.05;
    if (deg == 1) {
      const OracleResult oracle = circle_lifting_oracle(u, 64, 1.0);
      const double agree = std::abs(res.energy - oracle.energy) / oracle.energy;
      d.add("oracle_energy", oracle.energy).add("oracle_rel_diff", agree);
      ok = ok && agree <= 0.01;
    }
  }
  CriterionResult r;
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// 7. Penalized gluing: glued penalized energy over the patch sum, under refinement.
CriterionResult penalized_glue() {
  constexpr double kEps = 0.25;
  Detail d;
  bool ok = true;
  for (int K : {2, 3}) {
    const Covering cov = Covering::build(BaseManifold::Circle, K);
    double cs[2];
    int idx = 0;
    for (int n : {64, 128}) {
      const TraceMap u = circle_degree_trace(n, 1);
      const TraceMap flat_u(u.domain(), TargetSpec::euclidean(2),
                            std::vector<double>(u.values().begin(), u.values().end()));
      const PenaltySpec penalty = PenaltySpec::distance_power(TargetSpec::circle(), kEps, 2.0);
      MinimizeConfig cfg = extension_config(2.0);
      cfg.projection = ProjectionMode::None;
      const int nt = n / 2;
      std::vector<GridMap> patches;
      for (int i = 0; i < K; ++i) {
        const auto counts = cov.patch_counts(i, u.domain());
        const DomainSpec base = DomainSpec::box(cov.patch_base_axes(i, counts));
        const TraceMap ui = sample_map<TraceMap>(base, TargetSpec::euclidean(2),
                                                 [&](auto b, auto out) { u.evaluate_into(b, out); });
        patches.push_back(minimize_penalized(ui, penalty, nt, 1.0, cfg).map);
      }
      const auto U = glue(cov, patches, flat_u, GlueOptions{}).first;
      double sum = 0.0;
      for (const GridMap& P : patches) sum += penalized_energy(P, penalty, 2.0).value;
      const double glued = penalized_energy(U, penalty, 2.0).value;
      const double c = glued / sum;
      const std::string tag = "K" + std::to_string(K) + "_n" + std::to_string(n);
      d.add("glued_" + tag, glued).add("patch_sum_" + tag, sum).add("C_" + tag, c);
      cs[idx++] = c;
    }
    const double change = rel_change(cs[0], cs[1]);
    d.add("C_change_K" + std::to_string(K), change);
    ok = ok && std::isfinite(cs[0]) && std::isfinite(cs[1]) && change <= 0.2;
  }
  CriterionResult r;
  r.passed = ok;
  r.detail = d.str();
  return r;
}

// 8. Penalized energies of the identity trace stay below the constrained competitor.
CriterionResult isobe_bounded() {
  const TraceMap u = circle_degree_trace(64, 1);
  MinimizeConfig cfg = extension_config(2.0);
  const SweepResult sweep = isobe_sweep(u, 2.0, {0.5, 0.25, 0.125}, {1.0, 0.5}, 33, cfg);
  Detail d;
  bool below = true;
  for (const SweepPoint& pt : sweep.points) {
    d.add("energy_eps" + format_real(pt.eps) + "_L" + format_real(pt.depth), pt.energy);
    below = below && pt.energy <= 1.1 * kTwoPi;
  }
  d.add("bounded_in_eps", sweep.bounded_in_eps ? "true" : "false");
  d.add("vanishing_in_depth", sweep.vanishing_in_depth ? "true" : "false");
  CriterionResult r;
  r.passed = below && sweep.bounded_in_eps;
  r.detail = d.str();
  return r;
}

// 9. Gagliardo seminorm of random degree-0 traces over their extension energy.
CriterionResult trace_inequality(std::uint64_t seed) {
  constexpr int kTraces = 10;
  double cs[2];
  int idx = 0;
  Detail d;
  bool ok = true;
  for (int n : {64, 128}) {
    double c = 0.0;
    for (int k = 0; k < kTraces; ++k) {
      const TraceMap u = random_degree_zero_trace(n, seed + k);
      const double g = gagliardo_energy(u, 0.5, 2.0).value;
      const double e = minimize_extension(u, n / 2, 1.0, extension_config(2.0)).energy;
      ok = ok && e > 0.0;
      c = std::max(c, g / e);
    }
    d.add("C_n" + std::to_string(n), c);
    cs[idx++] = c;
  }
  const double change = rel_change(cs[0], cs[1]);
  d.add("C_change", change);
  CriterionResult r;
  r.passed = ok && change <= 0.3;
  r.detail = d.str();
  return r;
}

// 10. Analytic gradient of the descent objective against central differences.
CriterionResult gradient_check(std::uint64_t seed) {
  const DomainSpec dom = DomainSpec::square2d(33, 33);
  std::mt19937_64 rng(seed);
  const auto t0 = random_terms(rng, 4, 1.0, true), t1 = random_terms(rng, 4, 1.0, true);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> x(dom.node_count() * 2);
  std::vector<double> c(2);
  for (std::size_t n = 0; n < dom.node_count(); ++n) {
    dom.node_coords(n, c);
    x[2 * n] = 1.0 + eval_terms(t0, c[0], c[1]) + noise(rng);
    x[2 * n + 1] = eval_terms(t1, c[0], c[1]) + noise(rng);
  }
  const PenaltySpec penalty = PenaltySpec::distance_power(TargetSpec::circle(), 0.25, 2.0);
  Detail d;
  bool ok = true;
  for (double p : {2.0, 3.0}) {
    const DirichletOperator op(dom, 2);
    auto objective = [&](std::span<const double> v, std::span<double> g) {
      double e = op.energy_and_gradient(v, p, g);
      return e + penalty_energy(dom, v, penalty, g.data());
    };
    std::vector<double> grad(x.size()), scratch(x.size());
    objective(x, grad);
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const std::size_t i = pick(rng);
      // Fourth-order central difference keeps both truncation and cancellation small.
      const double step = 1e-4 * std::max(1.0, std::abs(x[i]));
      auto at = [&](double offset) {
        std::vector<double> xs = x;
        xs[i] += offset;
        return objective(xs, scratch);
      };
      const double fd = (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) /
                        (12.0 * step);
      const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6 * gmax});
      worst = std::max(worst, std::abs(fd - grad[i]) / denom);
    }
    d.add(p == 2.0 ? "max_rel_error_p2" : "max_rel_error_p3", worst);
    ok = ok && worst <= 1e-5;
  }
  CriterionResult r;
  r.passed = ok;
  r.detail = d.str();
  return r;
}

}  // namespace

std::pair<GridMap, GridMap> random_fold_pair(int n, int nu, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const DomainSpec dom = DomainSpec::square2d(n, n);
  std::vector<std::vector<Trig>> bottom, a, b;
  for (int c = 0; c < nu; ++c) {
    bottom.push_back(random_terms(rng, 3, 1.0, false));
    a.push_back(random_terms(rng, 3, 1.0, true));
    b.push_back(random_terms(rng, 3, 1.0, true));
  }
  auto make = [&](const std::vector<std::vector<Trig>>& body) {
    return sample_map<GridMap>(dom, TargetSpec::euclidean(nu), [&](auto x, auto out) {
      for (int c = 0; c < nu; ++c)
        out[c] = eval_terms(bottom[c], x[0], 0.0) + x[1] * (1.0 + eval_terms(body[c], x[0], x[1]));
    });
  };
  return {make(a), make(b)};
}

std::pair<SampledSet, SampledSet> random_cone_instance(int res, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Arc {
    double center, half, inner;
  };
  struct Disc {
    double x, y, rad;
  };
  std::vector<Arc> arcs;
  const int narcs = 1 + static_cast<int>(unit(rng) * 3.0);
  for (int k = 0; k < narcs; ++k)
    arcs.push_back({kTwoPi * unit(rng), 0.1 + 0.5 * unit(rng), 0.3 + 0.6 * unit(rng)});
  const double thickness = 0.15 + 0.25 * unit(rng);
  const double margin = 0.15;
  std::vector<Disc> fblobs, gblobs;
  for (int k = 0; k < 3; ++k) {
    const double rr = 0.4 * unit(rng), th = kTwoPi * unit(rng);
    fblobs.push_back({rr * std::cos(th), rr * std::sin(th), 0.05 + 0.15 * unit(rng)});
    const double gr = 1.2 * unit(rng), gth = kTwoPi * unit(rng);
    gblobs.push_back({gr * std::cos(gth), gr * std::sin(gth), 0.05 + 0.2 * unit(rng)});
  }
  auto in_arc = [](const Arc& a, double angle, double extra) {
    return std::abs(std::remainder(angle - a.center, kTwoPi)) <= a.half + extra;
  };
  const SampledSet F = SampledSet::from_predicate(2, res, false, [&](std::span<const double> x) {
    const double rho = std::hypot(x[0], x[1]);
    if (rho > 1.0) return false;
    for (const Disc& d : fblobs)
      if (std::hypot(x[0] - d.x, x[1] - d.y) <= d.rad) return true;
    const double angle = std::atan2(x[1], x[0]);
    for (const Arc& a : arcs)
      if (rho >= a.inner && in_arc(a, angle, 0.0)) return true;
    return false;
  });
  const SampledSet G = SampledSet::from_predicate(2, res, true, [&](std::span<const double> x) {
    const double rho = std::hypot(x[0], x[1]);
    for (const Disc& d : gblobs)
      if (std::hypot(x[0] - d.x, x[1] - d.y) < d.rad) return true;
    if (rho <= 1.0 - thickness || rho >= 1.3) return false;
    const double angle = std::atan2(x[1], x[0]);
    for (const Arc& a : arcs)
      if (in_arc(a, angle, margin)) return true;
    return false;
  });
  return {F, G};
}

TraceMap circle_degree_trace(int n, int degree) {
  return sample_map<TraceMap>(DomainSpec::circle(n), TargetSpec::circle(), [&](auto x, auto out) {
    out[0] = std::cos(degree * x[0]);
    out[1] = std::sin(degree * x[0]);
  });
}

TraceMap random_degree_zero_trace(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-0.6, 0.6);
  double a[4], b[4];
  for (int k = 1; k <= 3; ++k) {
    a[k] = coef(rng);
    b[k] = coef(rng);
  }
  return sample_map<TraceMap>(DomainSpec::circle(n), TargetSpec::circle(), [&](auto x, auto out) {
    double phi = 0.0;
    for (int k = 1; k <= 3; ++k) phi += a[k] * std::cos(k * x[0]) + b[k] * std::sin(k * x[0]);
    out[0] = std::cos(phi);
    out[1] = std::sin(phi);
  });
}

std::string criterion_name(int id) {
  static const char* const kNames[] = {"gagliardo-exactness", "fold-trace-contract",
                                       "fold-energy-constant", "cone-lemma",
                                       "circle-glue",         "extension-closed-form",
                                       "penalized-glue",      "isobe-bounded",
                                       "trace-inequality",    "gradient-check"};
  if (id < 1 || id > kCriterionCount) throw ParameterError("unknown criterion " + std::to_string(id));
  return kNames[id - 1];
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  const std::string name = criterion_name(id);
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = gagliardo_exactness(); break;
      case 2: r = fold_trace_contract(seed); break;
      case 3: r = fold_energy_constant(seed); break;
      case 4: r = cone_lemma(seed); break;
      case 5: r = circle_glue(); break;
      case 6: r = extension_closed_form(); break;
      case 7: r = penalized_glue(); break;
      case 8: r = isobe_bounded(); break;
      case 9: r = trace_inequality(seed); break;
      default: r = gradient_check(seed); break;
    }
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error=\"") + e.what() + "\"";
  }
  r.id = id;
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options, const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<int> ids = options.only;
  if (ids.empty())
    for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);
  std::vector<CriterionResult> results;
  for (int id : ids) {
    results.push_back(run_criterion(id, options.seed));
    if (on_result) on_result(results.back());
  }
  return results;
}

std::string format_criterion_line(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  return std::string(r.passed ? "PASS " : "FAIL ") + std::to_string(r.id) + ' ' + r.name + ' ' +
         r.detail + " (" + secs + " s)";
}

std::string format_acceptance_report(const std::vector<CriterionResult>& results) {
  std::ostringstream out;
  int passed = 0;
  for (const CriterionResult& r : results) {
    const std::string key = "criterion_" + std::to_string(r.id);
    out << key << "_name=" << r.name << '\n';
    out << key << "_status=" << (r.passed ? "pass" : "fail") << '\n';
    std::string field;
    bool quoted = false;
    for (char ch : r.detail + ' ') {
      if (ch == '"') quoted = !quoted;
      if (ch == ' ' && !quoted) {
        if (!field.empty()) out << key << '_' << field << '\n';
        field.clear();
      } else {
        field += ch;
      }
    }
    out << key << "_seconds=" << format_real(r.seconds) << '\n';
    passed += r.passed;
  }
  out << "passed=" << passed << '\n';
  out << "failed=" << results.size() - passed << '\n';
  return out.str();
}

}  // namespace sobolev_glue
