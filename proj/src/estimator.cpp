#include "sobolev_glue/estimator.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/parallel.hpp"
#include "sobolev_glue/sgf.hpp"

namespace sobolev_glue {

void MinimizeConfig::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("p must lie in (1, inf)");
  if (max_iterations <= 0) throw ParameterError("max_iterations must be positive");
  if (!(tol > 0.0)) throw ParameterError("tol must be positive");
  if (!(step >= 0.0) || !std::isfinite(step)) throw ParameterError("step must be >= 0");
  if (!backtracking && step == 0.0) throw ParameterError("a fixed step rule needs step > 0");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ParameterError("shrink must lie in (0, 1)");
  if (max_backtracks < 0 || patience <= 0) throw ParameterError("invalid backtracking limits");
  if (!(init_noise >= 0.0)) throw ParameterError("init_noise must be >= 0");
}

MinimizeConfig parse_minimize_config(const std::string& text, MinimizeConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto as_int = [&] {
      const double v = parse_real(value);
      if (v != std::floor(v)) throw ParameterError("config key " + key + " needs an integer");
      return v;
    };
    if (key == "max_iterations") cfg.max_iterations = static_cast<int>(as_int());
    else if (key == "step") cfg.step = parse_real(value);
    else if (key == "tol") cfg.tol = parse_real(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
    else if (key == "p") cfg.p = parse_real(value);
    else if (key == "shrink") cfg.shrink = parse_real(value);
    else if (key == "max_backtracks") cfg.max_backtracks = static_cast<int>(as_int());
    else if (key == "patience") cfg.patience = static_cast<int>(as_int());
    else if (key == "init_noise") cfg.init_noise = parse_real(value);
    else if (key == "backtracking") {
      if (value == "true" || value == "1") cfg.backtracking = true;
      else if (value == "false" || value == "0") cfg.backtracking = false;
      else throw ParameterError("backtracking must be true or false");
    } else if (key == "projection") {
      if (value == "nearest") cfg.projection = ProjectionMode::Nearest;
      else if (value == "none") cfg.projection = ProjectionMode::None;
      else throw ParameterError("projection must be nearest or none");
    } else {
      throw ParameterError("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

DomainSpec collar_domain(const DomainSpec& base, int depth_nodes, double depth) {
  if (depth_nodes < 2) throw ParameterError("the depth axis needs at least 2 nodes");
  if (!(depth > 0.0) || !std::isfinite(depth)) throw ParameterError("depth must be positive");
  std::vector<Axis> axes = base.axes();
  axes.push_back(Axis{0.0, depth, depth_nodes, false});
  switch (base.kind()) {
    case DomainKind::Circle: return DomainSpec(DomainKind::CollarCircle, axes);
    case DomainKind::Torus: return DomainSpec(DomainKind::CollarTorus, axes);
    default: return DomainSpec::box(axes);
  }
}

namespace {

class Objective {
 public:
  Objective(const DomainSpec& domain, int nu, double p, const PenaltySpec& penalty)
      : dirichlet_(domain, nu), p_(p), penalty_(penalty) {}

  double operator()(std::span<const double> x, std::span<double> grad) const {
    double e = dirichlet_.energy_and_gradient(x, p_, grad);
    e += penalty_energy(dirichlet_.domain(), x, penalty_, grad.data());
    return e;
  }

 private:
  DirichletOperator dirichlet_;
  double p_;
  PenaltySpec penalty_;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct DescentOutcome {
  std::vector<double> x;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<StepRecord> log;
};

DescentOutcome descend(const DomainSpec& domain, const TraceMap& u, const TargetSpec& target,
                       const PenaltySpec& penalty, const MinimizeConfig& cfg, bool project) {
  const int nu = u.nu();
  const int nt = domain.axis(domain.dimension() - 1).count;
  const std::size_t nb = u.domain().node_count();
  const std::size_t n = domain.node_count() * nu;

  std::vector<double> x(n);
  for (std::size_t b = 0; b < nb; ++b)
    for (int t = 0; t < nt; ++t)
      std::copy(u.node(b).begin(), u.node(b).end(),
                x.begin() + static_cast<std::ptrdiff_t>((b * nt + t) * nu));
  // Bottom layer (t = 0) stays bit-identical to u.
  std::vector<std::uint8_t> free(domain.node_count(), 1);
  for (std::size_t b = 0; b < nb; ++b) free[b * nt] = 0;

  auto project_free = [&](std::vector<double>& v) {
    if (!project || !target.is_manifold()) return;
    for (std::size_t k = 0; k < free.size(); ++k)
      if (free[k]) target.project(std::span<double>(v.data() + k * nu, nu));
  };

  if (cfg.init_noise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.init_noise);
    for (std::size_t k = 0; k < free.size(); ++k)
      if (free[k])
        for (int c = 0; c < nu; ++c) x[k * nu + c] += noise(rng);
    project_free(x);
  }

  const Objective objective(domain, nu, cfg.p, penalty);
  std::vector<double> g(n), xn(n), gn(n);
  auto mask = [&](std::vector<double>& grad) {
    for (std::size_t k = 0; k < free.size(); ++k)
      if (!free[k])
        for (int c = 0; c < nu; ++c) grad[k * nu + c] = 0.0;
  };

  double e = objective(x, g);
  mask(g);
  if (!std::isfinite(e) || !all_finite(g))
    throw OptimizationError("objective is not finite at the initial map");

  double inv_h2 = 0.0;
  for (const Axis& a : domain.axes()) inv_h2 += 1.0 / (a.spacing() * a.spacing());
  const double alpha0 =
      cfg.step > 0.0 ? cfg.step : 1.0 / (4.0 * cfg.p * domain.cell_volume() * inv_h2);
  double alpha = alpha0;

  DescentOutcome out;
  int stalled = 0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (dot(g, g) == 0.0) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    double en = 0.0;
    for (int bt = 0; bt <= (cfg.backtracking ? cfg.max_backtracks : 0); ++bt) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] - alpha * g[i];
      project_free(xn);
      en = objective(xn, gn);
      mask(gn);
      const bool ok = std::isfinite(en) && all_finite(gn) && en <= e;
      out.log.push_back({it, alpha, en, ok});
      if (ok) {
        accepted = true;
        break;
      }
      if (!cfg.backtracking) {
        std::ostringstream msg;
        msg << "energy increased from " << format_real(e) << " to " << format_real(en)
            << " at iteration " << it << " with fixed step " << format_real(alpha);
        throw OptimizationError(msg.str());
      }
      alpha *= cfg.shrink;
    }
    out.iterations = it;
    if (!accepted) {
      if (!std::isfinite(en))
        throw OptimizationError("objective became non-finite at iteration " + std::to_string(it) +
                                " even at step " + format_real(alpha));
      out.converged = true;  // no descent at any trial step: stationary to rounding
      break;
    }
    // Barzilai-Borwein step from the accepted pair.
    if (cfg.backtracking) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = xn[i] - x[i];
        ss += s * s;
        sy += s * (gn[i] - g[i]);
      }
      alpha = sy > 0.0 ? ss / sy : 2.0 * alpha;
      alpha = std::clamp(alpha, 1e-12 * alpha0, 1e6 * alpha0);
    }
    const double rel = (e - en) / std::max(std::abs(e), std::numeric_limits<double>::min());
    x.swap(xn);
    g.swap(gn);
    e = en;
    stalled = rel < cfg.tol ? stalled + 1 : 0;
    if (stalled >= cfg.patience) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  out.energy = e;
  return out;
}

void require_trace(const TraceMap& u) {
  if (u.target().is_manifold() && u.max_constraint_violation() > u.constraint_tol())
    throw PreconditionError("trace does not take values on the target manifold");
}

}  // namespace

MinimizeResult minimize_extension(const TraceMap& u, int depth_nodes, double depth,
                                  const MinimizeConfig& cfg) {
  cfg.validate();
  require_trace(u);
  const DomainSpec domain = collar_domain(u.domain(), depth_nodes, depth);
  DescentOutcome d = descend(domain, u, u.target(), PenaltySpec::none(), cfg,
                             cfg.projection == ProjectionMode::Nearest);
  GridMap map(domain, u.target(), std::move(d.x), default_constraint_tol(domain));
  return {std::move(map), d.energy, d.iterations, d.converged, std::move(d.log)};
}

MinimizeResult minimize_penalized(const TraceMap& u, const PenaltySpec& penalty, int depth_nodes,
                                  double depth, const MinimizeConfig& cfg) {
  cfg.validate();
  require_trace(u);
  if (penalty.kind() != PenaltySpec::Kind::None && penalty.manifold().nu() != u.nu())
    throw ParameterError("penalty manifold dimension does not match the trace");
  const DomainSpec domain = collar_domain(u.domain(), depth_nodes, depth);
  const TargetSpec flat = TargetSpec::euclidean(u.nu());
  DescentOutcome d = descend(domain, u, flat, penalty, cfg, false);
  GridMap map(domain, flat, std::move(d.x));
  const double energy = penalized_energy(map, penalty, cfg.p).value;
  return {std::move(map), energy, d.iterations, d.converged, std::move(d.log)};
}

SweepResult isobe_sweep(const TraceMap& u, double p, const std::vector<double>& eps_list,
                        const std::vector<double>& depth_list, int depth_nodes,
                        const MinimizeConfig& cfg) {
  if (eps_list.empty() || depth_list.empty()) throw ParameterError("sweep lists must be nonempty");
  for (double v : eps_list)
    if (!(v > 0.0)) throw ParameterError("sweep eps values must be positive");
  for (double v : depth_list)
    if (!(v > 0.0)) throw ParameterError("sweep depths must be positive");
  if (!u.target().is_manifold()) throw ParameterError("isobe_sweep needs a manifold target");
  MinimizeConfig run = cfg;
  run.p = p;
  run.projection = ProjectionMode::None;
  run.validate();

  SweepResult result;
  const std::size_t ne = eps_list.size(), nl = depth_list.size();
  result.points.resize(ne * nl);
  std::vector<std::string> errors(ne * nl);
  parallel_for(ne * nl, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const double eps = eps_list[k / nl], L = depth_list[k % nl];
      const int nt = std::max(3, static_cast<int>(std::lround((depth_nodes - 1) * L)) + 1);
      try {
        const auto penalty = PenaltySpec::distance_power(u.target(), eps, p);
        const MinimizeResult r = minimize_penalized(u, penalty, nt, L, run);
        result.points[k] = {eps, L, r.energy, r.iterations};
      } catch (const Error& e) {
        errors[k] = "eps=" + format_real(eps) + " depth=" + format_real(L) + ": " + e.what();
      }
    }
  });
  for (const std::string& e : errors)
    if (!e.empty()) throw OptimizationError(e);

  // Bounded in eps: per depth, energies along decreasing eps either level off
  // (increments non-increasing) or stay within 5% of each other.
  bool bounded = true;
  result.limsup_by_depth.assign(nl, 0.0);
  for (std::size_t l = 0; l < nl; ++l) {
    std::vector<std::pair<double, double>> col;
    for (std::size_t k = 0; k < ne; ++k) col.emplace_back(eps_list[k], result.points[k * nl + l].energy);
    std::sort(col.begin(), col.end(), [](auto& a, auto& b) { return a.first > b.first; });
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto& [eps, e] : col) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    result.limsup_by_depth[l] = hi;
    const double slack = 1e-6 * std::max(hi, 1e-300);
    bool levelling = true;
    for (std::size_t k = 2; k < col.size(); ++k)
      levelling = levelling &&
                  col[k].second - col[k - 1].second <= col[k - 1].second - col[k - 2].second + slack;
    const bool flat = hi == 0.0 || (hi - lo) <= 0.05 * hi;
    bounded = bounded && std::isfinite(hi) && (levelling || flat);
  }
  result.bounded_in_eps = bounded;

  // Vanishing as depth -> 0: limsup non-increasing as depth decreases, with a
  // positive log-log slope (or identically zero).
  std::vector<std::pair<double, double>> byL;
  for (std::size_t l = 0; l < nl; ++l) byL.emplace_back(depth_list[l], result.limsup_by_depth[l]);
  std::sort(byL.begin(), byL.end());
  const double top = std::max_element(byL.begin(), byL.end(),
                                      [](auto& a, auto& b) { return a.second < b.second; })->second;
  if (top == 0.0) {
    result.vanishing_in_depth = true;
  } else if (byL.size() >= 2 && byL.front().second > 0.0) {
    bool monotone = true;
    for (std::size_t k = 1; k < byL.size(); ++k)
      monotone = monotone && byL[k - 1].second <= byL[k].second * (1.0 + 1e-6);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [L, e] : byL) {
      const double lx = std::log(L), ly = std::log(e);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double m = static_cast<double>(byL.size());
    const double denom = m * sxx - sx * sx;
    const double slope = denom > 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    result.vanishing_in_depth = monotone && slope > 0.0;
  }
  return result;
}

namespace {

void require_circle_trace(const TraceMap& u) {
  const DomainSpec& d = u.domain();
  if (d.dimension() != 1 || !d.axis(0).periodic)
    throw DomainError("the lifting oracle needs a trace on S^1");
  if (u.target().kind() != TargetKind::Circle)
    throw DomainError("the lifting oracle needs a circle-valued trace");
}

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

// Lifted angles along the base and the winding number.
std::pair<std::vector<double>, int> lift(const TraceMap& u) {
  constexpr double kJumpLimit = kPi - 1e-12;
  const std::size_t n = u.domain().node_count();
  std::vector<double> phi(n);
  auto angle = [&](std::size_t i) { return std::atan2(u.node(i)[1], u.node(i)[0]); };
  phi[0] = angle(0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double d = wrap_angle(angle(j) - angle(i));
    if (std::abs(d) >= kJumpLimit)
      throw LiftingError("angular jump of " + format_real(d) + " between nodes " +
                         std::to_string(i) + " and " + std::to_string(j));
    total += d;
    if (j != 0) phi[j] = phi[i] + d;
  }
  return {std::move(phi), static_cast<int>(std::lround(total / kTwoPi))};
}

}  // namespace

int winding_number(const TraceMap& u) {
  require_circle_trace(u);
  return lift(u).second;
}

OracleResult circle_lifting_oracle(const TraceMap& u, int depth_nodes, double depth) {
  require_circle_trace(u);
  const DomainSpec domain = collar_domain(u.domain(), depth_nodes, depth);
  auto [phi0, degree] = lift(u);
  const Axis& ax = u.domain().axis(0);
  const int nth = ax.count, nt = depth_nodes;
  const double hth = ax.spacing(), ht = domain.axis(1).spacing();

  // phi = degree * theta + psi with psi periodic; the cross term of the
  // quadratic cell energy sums to zero over each row, leaving a graph Laplacian
  // for psi with weights 1/h^2 on the edges used by the forward-difference cells.
  std::vector<double> psi0(nth);
  for (int i = 0; i < nth; ++i) psi0[i] = phi0[i] - degree * ax.coord(i);
  const int unknowns = nth * (nt - 1);
  auto id = [&](int i, int j) { return (j - 1) * nth + i; };  // j >= 1
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  auto edge = [&](int i0, int j0, int i1, int j1, double w) {
    const bool k0 = j0 == 0, k1 = j1 == 0;
    if (!k0) trip.emplace_back(id(i0, j0), id(i0, j0), w);
    if (!k1) trip.emplace_back(id(i1, j1), id(i1, j1), w);
    if (!k0 && !k1) {
      trip.emplace_back(id(i0, j0), id(i1, j1), -w);
      trip.emplace_back(id(i1, j1), id(i0, j0), -w);
    } else if (k0 && !k1) {
      rhs[id(i1, j1)] += w * psi0[i0];
    } else if (!k0 && k1) {
      rhs[id(i0, j0)] += w * psi0[i1];
    }
  };
  for (int j = 0; j < nt - 1; ++j)
    for (int i = 0; i < nth; ++i) {
      edge(i, j, (i + 1) % nth, j, 1.0 / (hth * hth));
      edge(i, j, i, j + 1, 1.0 / (ht * ht));
    }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw OptimizationError("lifted Laplace system is singular");
  const Eigen::VectorXd psi = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw OptimizationError("lifted Laplace solve failed");

  std::vector<double> values(domain.node_count() * 2);
  for (int i = 0; i < nth; ++i)
    for (int j = 0; j < nt; ++j) {
      const std::size_t n = static_cast<std::size_t>(i) * nt + j;
      if (j == 0) {
        values[2 * n] = u.node(i)[0];
        values[2 * n + 1] = u.node(i)[1];
        continue;
      }
      const double ph = degree * ax.coord(i) + psi[id(i, j)];
      values[2 * n] = std::cos(ph);
      values[2 * n + 1] = std::sin(ph);
    }
  GridMap map(domain, TargetSpec::circle(), std::move(values), default_constraint_tol(domain));
  const double energy = dirichlet_p_energy(map, 2.0).value;
  return {std::move(map), energy, degree};
}

}  // namespace sobolev_glue
