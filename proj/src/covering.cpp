#include "sobolev_glue/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sobolev_glue/cone.hpp"
#include "sobolev_glue/energy.hpp"
#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/folding.hpp"
#include "sobolev_glue/parallel.hpp"
#include "sobolev_glue/sgf.hpp"

namespace sobolev_glue {

std::string_view to_string(BaseManifold base) {
  return base == BaseManifold::Circle ? "circle" : "torus";
}

BaseManifold base_manifold_from_string(std::string_view name) {
  if (name == "circle") return BaseManifold::Circle;
  if (name == "torus") return BaseManifold::Torus;
  throw ParameterError("base must be 'circle' or 'torus'");
}

namespace {

double wrap_centered(double d, double period) noexcept {
  return d - period * std::round(d / period);
}

}  // namespace

Covering Covering::build(BaseManifold base, int charts) {
  Covering c;
  c.base_ = base;
  if (base == BaseManifold::Circle) {
    if (charts < 2) throw ParameterError("a covering of S^1 needs K >= 2 charts");
    const double a = 1.5 * kPi / charts;
    for (int i = 0; i < charts; ++i)
      c.charts_.push_back(Chart{{kTwoPi * i / charts, 0.0}, a, std::min(1.25 * a, 0.99 * kPi)});
    return c;
  }
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(charts))));
  if (charts < 4 || k * k != charts)
    throw ParameterError("a covering of T^2 needs K = k^2 charts with k >= 2");
  const double a = 0.9 / k;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      c.charts_.push_back(Chart{{static_cast<double>(i) / k, static_cast<double>(j) / k}, a,
                                std::min(1.25 * a, 0.49)});
  return c;
}

Covering Covering::single(BaseManifold base) {
  Covering c;
  c.base_ = base;
  c.single_ = true;
  return c;
}

void Covering::unwrap(int i, std::span<const double> b, std::span<double> out) const {
  const Chart& ch = chart(i);
  for (int k = 0; k < chart_dim(); ++k)
    out[k] = ch.center[k] + wrap_centered(b[k] - ch.center[k], period());
}

bool Covering::to_chart(int i, std::span<const double> b, std::span<double> z) const {
  const Chart& ch = chart(i);
  double s = 0.0;
  for (int k = 0; k < chart_dim(); ++k) {
    z[k] = wrap_centered(b[k] - ch.center[k], period()) / ch.half_width;
    s += z[k] * z[k];
  }
  return std::sqrt(s) < ch.w_half_width / ch.half_width;
}

void Covering::from_chart(int i, std::span<const double> z, std::span<double> b) const {
  const Chart& ch = chart(i);
  for (int k = 0; k < chart_dim(); ++k) b[k] = ch.center[k] + ch.half_width * z[k];
}

bool Covering::in_chart_set(int i, std::span<const double> b) const {
  return chart_distance(i, b) < (single_ ? 1.0 : chart(i).half_width);
}

double Covering::chart_distance(int i, std::span<const double> b) const {
  if (single_) return 0.0;
  const Chart& ch = chart(i);
  double s = 0.0;
  for (int k = 0; k < chart_dim(); ++k) {
    const double d = wrap_centered(b[k] - ch.center[k], period());
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<Axis> Covering::patch_base_axes(int i, std::span<const int> counts) const {
  if (static_cast<int>(counts.size()) != chart_dim())
    throw ParameterError("patch counts must match the base dimension");
  std::vector<Axis> axes;
  if (single_) {
    for (int k = 0; k < chart_dim(); ++k) axes.push_back(Axis{0.0, period(), counts[k], true});
    return axes;
  }
  const Chart& ch = chart(i);
  for (int k = 0; k < chart_dim(); ++k)
    axes.push_back(Axis{ch.center[k] - ch.half_width, 2.0 * ch.half_width, counts[k], false});
  return axes;
}

std::vector<int> Covering::patch_counts(int i, const DomainSpec& base_grid) const {
  std::vector<int> counts;
  for (int k = 0; k < chart_dim(); ++k) {
    if (single_) {
      counts.push_back(base_grid.axis(k).count);
      continue;
    }
    const double span = 2.0 * chart(i).half_width;
    counts.push_back(std::max(3, static_cast<int>(std::lround(span / base_grid.axis(k).spacing())) + 1));
  }
  return counts;
}

double Covering::distortion(int) const { return 1.0; }

bool Covering::covers(const DomainSpec& base_grid) const {
  if (single_) return true;
  std::vector<double> b(base_grid.dimension());
  for (std::size_t n = 0; n < base_grid.node_count(); ++n) {
    base_grid.node_coords(n, b);
    bool hit = false;
    for (int i = 0; i < size() && !hit; ++i) hit = in_chart_set(i, b);
    if (!hit) return false;
  }
  return true;
}

std::vector<double> radial_fold_map(std::span<const double> direction, double z_m, double r) {
  double s = 0.0;
  for (double v : direction) s += v * v;
  if (std::abs(std::sqrt(s) - 1.0) > 1e-9) throw DomainError("z' must be a unit vector");
  if (!(z_m >= 0.0 && z_m <= 1.0)) throw DomainError("z_m must lie in (0, 1)");
  if (!(r > 0.0 && r < 1.0)) throw ParameterError("r must lie in (0, 1)");
  std::vector<double> out(direction.begin(), direction.end());
  for (double& v : out) v *= 1.0 - z_m * r;
  return out;
}

namespace {

constexpr double kUnitSlack = 1e-12;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Point of the folded annulus at fold coordinate s (0 on the unit sphere,
// 1 on the sphere of radius r) along `dir`.
void annulus_point(std::span<const double> dir, double s, double r, std::span<double> z) {
  const double rho = 1.0 - s * (1.0 - r);
  for (std::size_t k = 0; k < dir.size(); ++k) z[k] = rho * dir[k];
}

struct GlobalGrid {
  DomainSpec base;
  Axis depth;
  DomainSpec collar;
};

GlobalGrid global_grid(const Covering& covering, const TraceMap& u, const Axis& depth) {
  const DomainSpec& base = u.domain();
  const int m = covering.chart_dim();
  if (base.dimension() != m) throw DomainError("trace base dimension does not match the covering");
  for (int k = 0; k < m; ++k) {
    const Axis& a = base.axis(k);
    if (!a.periodic || std::abs(a.length - covering.period()) > 1e-12 || a.origin != 0.0)
      throw DomainError("trace base grid is not the covering's manifold");
  }
  std::vector<Axis> axes = base.axes();
  axes.push_back(depth);
  const DomainKind kind =
      covering.base() == BaseManifold::Circle ? DomainKind::CollarCircle : DomainKind::CollarTorus;
  return {base, depth, DomainSpec(kind, axes)};
}

void check_patches(const Covering& covering, const std::vector<GridMap>& patches,
                   const TraceMap& u, double tol) {
  const int m = covering.chart_dim();
  if (static_cast<int>(patches.size()) != covering.size())
    throw PreconditionError("expected one patch per chart (" + std::to_string(covering.size()) +
                            "), got " + std::to_string(patches.size()));
  const Axis& depth = patches[0].domain().axis(m);
  for (int i = 0; i < covering.size(); ++i) {
    const DomainSpec& pd = patches[i].domain();
    if (pd.dimension() != m + 1) throw DomainError("patch dimension does not match the covering");
    if (!(pd.axis(m) == depth)) throw DomainError("patches must share the depth axis");
    if (!(patches[i].target() == u.target())) throw DomainError("patch target differs from trace");
    if (!covering.is_single()) {
      const Chart& ch = covering.chart(i);
      for (int k = 0; k < m; ++k) {
        const Axis& a = pd.axis(k);
        if (a.periodic || std::abs(a.origin - (ch.center[k] - ch.half_width)) > 1e-9 ||
            std::abs(a.length - 2.0 * ch.half_width) > 1e-9)
          throw DomainError("patch " + std::to_string(i) + " does not span the closure of G_i");
      }
    }
  }

  // Bottom traces against u and against each other on overlaps.
  std::vector<double> x(m + 1), b(m), bj(m + 1), ui(u.nu()), uj(u.nu());
  for (int i = 0; i < covering.size(); ++i) {
    const GridMap& P = patches[i];
    const TraceMap bottom = extract_trace(P, P.domain().bottom_face());
    for (std::size_t n = 0; n < bottom.domain().node_count(); ++n) {
      bottom.domain().node_coords(n, b);
      auto pv = bottom.node(n);
      u.evaluate_into(b, ui);
      double e = 0.0;
      for (int c = 0; c < u.nu(); ++c) e = std::max(e, std::abs(pv[c] - ui[c]));
      if (e > tol)
        throw PreconditionError("patch " + std::to_string(i) + " bottom trace differs from u by " +
                                format_real(e));
      if (covering.is_single()) continue;
      for (int j = 0; j < covering.size(); ++j) {
        if (j == i || !covering.in_chart_set(j, b)) continue;
        covering.unwrap(j, b, std::span<double>(bj).first(m));
        bj[m] = depth.origin;
        patches[j].evaluate_into(bj, uj);
        double d = 0.0;
        for (int c = 0; c < u.nu(); ++c) d = std::max(d, std::abs(pv[c] - uj[c]));
        if (d > tol)
          throw PreconditionError("patches " + std::to_string(i) + " and " + std::to_string(j) +
                                  " disagree on their overlap by " + format_real(d));
      }
    }
  }
}

// Base cell corners of an arbitrary base point.
template <class Fn>
void for_each_cell_corner(const DomainSpec& base, std::span<const double> b, Fn&& fn) {
  const int m = base.dimension();
  std::array<int, 2> lo{};
  for (int k = 0; k < m; ++k) {
    const Axis& a = base.axis(k);
    double t = (b[k] - a.origin) / a.spacing();
    t = std::fmod(t, static_cast<double>(a.count));
    if (t < 0) t += a.count;
    lo[k] = std::min(static_cast<int>(std::floor(t)), a.count - 1);
  }
  std::array<int, 2> idx{};
  for (int corner = 0; corner < (1 << m); ++corner) {
    for (int k = 0; k < m; ++k) idx[k] = lo[k] + ((corner >> k) & 1);
    fn(base.flat_index(std::span<const int>(idx.data(), m)));
  }
}

}  // namespace

std::pair<GridMap, GlueReport> glue(const Covering& covering, const std::vector<GridMap>& patches,
                                    const TraceMap& u, const GlueOptions& options) {
  if (!(options.p > 1.0)) throw ParameterError("p must lie in (1, inf)");
  if (patches.empty()) throw PreconditionError("no patches given");
  const int m = covering.chart_dim();
  if (patches[0].domain().dimension() != m + 1)
    throw DomainError("patch dimension does not match the covering");
  const GlobalGrid grid = global_grid(covering, u, patches[0].domain().axis(m));
  const double tol =
      options.tol.value_or(10.0 * std::max(grid.base.max_spacing(), grid.depth.spacing()));
  check_patches(covering, patches, u, tol);

  GlueReport report;
  report.p = options.p;
  for (const GridMap& P : patches) {
    report.patch_energies.push_back(dirichlet_p_energy(P, options.p).value);
    report.patch_energy_sum += report.patch_energies.back();
  }
  for (int i = 0; i < covering.size(); ++i) report.distortions.push_back(covering.distortion(i));

  const int nu = u.nu();
  const int nt = grid.depth.count;
  const std::size_t nb = grid.base.node_count();
  const TargetSpec& target = u.target();
  auto at = [&](std::size_t b, int t) { return (b * nt + static_cast<std::size_t>(t)) * nu; };

  if (covering.is_single()) {
    const GridMap& P = patches[0];
    if (!(P.domain().axes() == grid.collar.axes()))
      throw DomainError("single-chart patch must live on the global collar grid");
    GridMap U(grid.collar, target, std::vector<double>(P.values().begin(), P.values().end()),
              P.constraint_tol());
    report.energy = report.patch_energy_sum;
    report.degenerate = report.patch_energy_sum == 0.0;
    report.ratio = report.degenerate ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    report.trace_error = sup_distance(extract_trace(U, grid.collar.bottom_face()), u);
    return {std::move(U), report};
  }

  // V starts as the cylindrical extension of u; H marks where it is meaningful.
  std::vector<double> V(grid.collar.node_count() * nu);
  for (std::size_t b = 0; b < nb; ++b)
    for (int t = 0; t < nt; ++t)
      std::copy(u.node(b).begin(), u.node(b).end(), V.begin() + static_cast<std::ptrdiff_t>(at(b, t)));
  std::vector<std::uint8_t> H(nb, 0);
  double violation = 0.0;

  auto eval_patch = [&](int i, std::span<const double> b_unwrapped, double t, std::span<double> out) {
    double x[3];
    for (int k = 0; k < m; ++k) x[k] = b_unwrapped[k];
    x[m] = t;
    patches[i].evaluate_into(std::span<const double>(x, m + 1), out);
  };

  auto later_covers = [&](int i, std::span<const double> b) {
    for (int j = i + 1; j < covering.size(); ++j)
      if (covering.in_chart_set(j, b)) return true;
    return false;
  };
  // Later charts eroded by one base cell, so F_i also holds the nodes next to
  // their boundaries.
  const double erosion = grid.base.max_spacing() * std::sqrt(static_cast<double>(m));
  auto later_covers_deep = [&](int i, std::span<const double> b) {
    for (int j = i + 1; j < covering.size(); ++j)
      if (covering.chart_distance(j, b) < covering.chart(j).half_width - erosion) return true;
    return false;
  };

  auto check_invariant = [&](int i, GlueStep& step) {
    std::vector<double> b(m);
    for (std::size_t n = 0; n < nb; ++n) {
      grid.base.node_coords(n, b);
      if (!H[n] && !later_covers(i, b)) ++step.coverage_gaps;
    }
    if (step.coverage_gaps && options.abort_on_gap)
      throw ResolutionError("covering invariant fails after step " + std::to_string(i) + " at " +
                            std::to_string(step.coverage_gaps) + " base nodes");
  };

  auto trace_error = [&]() {
    double worst = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      if (!H[b]) continue;
      double s = 0.0;
      for (int c = 0; c < nu; ++c) {
        const double d = V[at(b, 0) + c] - u.node(b)[c];
        s += d * d;
      }
      worst = std::max(worst, std::sqrt(s));
    }
    return worst;
  };

  auto finish_value = [&](std::span<double> y) {
    violation = std::max(violation, target.distance(y));
    target.project(y);
  };

  // Step 0: V = U_0 on G_0.
  {
    GlueStep step;
    step.chart = 0;
    std::vector<double> b(m), bu(m);
    for (std::size_t n = 0; n < nb; ++n) {
      grid.base.node_coords(n, b);
      if (!covering.in_chart_set(0, b)) continue;
      H[n] = 1;
      ++step.inner_nodes;
      covering.unwrap(0, b, bu);
      for (int t = 0; t < nt; ++t) {
        std::span<double> y(V.data() + at(n, t), nu);
        eval_patch(0, bu, grid.depth.coord(t), y);
        finish_value(y);
      }
    }
    step.trace_error = trace_error();
    check_invariant(0, step);
    report.steps.push_back(step);
  }

  for (int i = 1; i < covering.size(); ++i) {
    GlueStep step;
    step.chart = i;
    const Chart& ch = covering.chart(i);

    // Chart sampling of F_i and E_i.
    int cres = options.chart_res.value_or(0);
    if (cres == 0) {
      const double h = grid.base.max_spacing() / ch.half_width;
      cres = std::clamp(static_cast<int>(std::ceil(4.0 / h)) + 1, 33, m == 1 ? 4097 : 513);
    }
    const SampledSet F = SampledSet::from_predicate(m, cres, false, [&](std::span<const double> z) {
      if (norm(z) > 1.0 + kUnitSlack) return false;
      double b[2];
      covering.from_chart(i, z, std::span<double>(b, m));
      return !later_covers_deep(i, std::span<const double>(b, m));
    });
    const SampledSet E = SampledSet::from_predicate(m, cres, true, [&](std::span<const double> z) {
      double b[2];
      covering.from_chart(i, z, std::span<double>(b, m));
      if (covering.chart_distance(i, std::span<const double>(b, m)) >= ch.w_half_width) return false;
      bool inside = true;
      for_each_cell_corner(grid.base, std::span<const double>(b, m),
                           [&](std::size_t c) { inside = inside && H[c]; });
      return inside;
    });
    if (!check_boundary_containment(F, E))
      throw ResolutionError("step " + std::to_string(i) +
                            ": F_i ∩ ∂B_1 ⊄ E_i at chart resolution " + std::to_string(cres));
    ConeCertificate cert;
    try {
      cert = find_cone(F, E, ConeOptions{options.ladder_steps, std::nullopt, options.max_radius});
    } catch (const ResolutionError& e) {
      throw ResolutionError("step " + std::to_string(i) + ": " + e.what());
    }
    step.r = cert.r;
    step.cone_size = cert.cone_size();
    step.direction_res = cert.direction_res;

    GridMap previous(grid.collar, TargetSpec::euclidean(nu), V);
    std::vector<double> nextV = V;
    std::vector<std::uint8_t> nextH(nb, 0);
    std::vector<double> b(m), bu(m), z(m), dir(m), zs(m), bs(m), x(m + 1);
    for (std::size_t n = 0; n < nb; ++n) {
      grid.base.node_coords(n, b);
      if (!covering.to_chart(i, b, z)) {
        nextH[n] = H[n];
        continue;
      }
      const double rho = norm(z);
      if (rho > 1.0 + kUnitSlack) {
        nextH[n] = H[n];
        continue;
      }
      if (rho < cert.r) {
        nextH[n] = 1;
        ++step.inner_nodes;
        covering.unwrap(i, b, bu);
        for (int t = 0; t < nt; ++t) {
          std::span<double> y(nextV.data() + at(n, t), nu);
          eval_patch(i, bu, grid.depth.coord(t), y);
          finish_value(y);
        }
        continue;
      }
      if (!cert.directions[cert.bin_of(z)]) {
        ++step.dropped_nodes;
        continue;
      }
      nextH[n] = 1;
      ++step.fold_nodes;
      for (int k = 0; k < m; ++k) dir[k] = z[k] / rho;
      const double s = std::clamp((1.0 - rho) / (1.0 - cert.r), 0.0, 1.0);
      for (int t = 0; t < nt; ++t) {
        const double tau = (grid.depth.coord(t) - grid.depth.origin) / grid.depth.length;
        const FoldSource src = fold_source(s, tau);
        annulus_point(dir, std::clamp(src.x1, 0.0, 1.0), cert.r, zs);
        covering.from_chart(i, zs, bs);
        const double depth_coord =
            grid.depth.origin + std::clamp(src.x2, 0.0, 1.0) * grid.depth.length;
        std::span<double> y(nextV.data() + at(n, t), nu);
        if (src.from_u1) {
          eval_patch(i, bs, depth_coord, y);
        } else {
          for_each_cell_corner(grid.base, bs, [&](std::size_t c) {
            if (!H[c]) ++step.invalid_samples;
          });
          for (int k = 0; k < m; ++k) x[k] = bs[k];
          x[m] = depth_coord;
          previous.evaluate_into(x, y);
        }
        finish_value(y);
      }
    }
    V.swap(nextV);
    H.swap(nextH);
    step.trace_error = trace_error();
    check_invariant(i, step);
    report.steps.push_back(step);
  }

  GridMap U(grid.collar, target, std::move(V), default_constraint_tol(grid.collar));
  report.constraint_violation = violation;
  report.trace_error = sup_distance(extract_trace(U, grid.collar.bottom_face()), u);
  report.energy = dirichlet_p_energy(U, options.p).value;
  report.degenerate = report.energy == 0.0 && report.patch_energy_sum == 0.0;
  report.ratio = report.degenerate ? std::numeric_limits<double>::quiet_NaN()
                                   : report.energy / report.patch_energy_sum;
  return {std::move(U), report};
}

GlueVerification verify_glue(const GridMap& glued, const TraceMap& u, const Covering& covering,
                             const std::vector<GridMap>& patches, double p) {
  GlueVerification v;
  const int m = covering.chart_dim();
  const DomainSpec& dom = glued.domain();
  if (dom.dimension() != m + 1) throw DomainError("glued map has the wrong dimension");
  v.trace_error = sup_distance(extract_trace(glued, dom.bottom_face()), u);
  v.energy = dirichlet_p_energy(glued, p).value;
  for (const GridMap& P : patches) v.patch_energy_sum += dirichlet_p_energy(P, p).value;
  v.degenerate = v.energy == 0.0 && v.patch_energy_sum == 0.0;
  v.ratio = v.degenerate ? std::numeric_limits<double>::quiet_NaN()
                         : v.energy / v.patch_energy_sum;
  return v;
}

std::string format_glue_report(const GlueReport& report) {
  std::ostringstream out;
  out << "p=" << format_real(report.p) << '\n';
  out << "charts=" << report.patch_energies.size() << '\n';
  for (const GlueStep& s : report.steps) {
    const std::string k = std::to_string(s.chart);
    out << "r_" << k << '=' << format_real(s.r) << '\n';
    out << "cone_size_" << k << '=' << s.cone_size << '\n';
    out << "direction_res_" << k << '=' << s.direction_res << '\n';
    out << "inner_nodes_" << k << '=' << s.inner_nodes << '\n';
    out << "fold_nodes_" << k << '=' << s.fold_nodes << '\n';
    out << "dropped_nodes_" << k << '=' << s.dropped_nodes << '\n';
    out << "invalid_samples_" << k << '=' << s.invalid_samples << '\n';
    out << "coverage_gaps_" << k << '=' << s.coverage_gaps << '\n';
    out << "trace_error_" << k << '=' << format_real(s.trace_error) << '\n';
  }
  for (std::size_t i = 0; i < report.patch_energies.size(); ++i)
    out << "patch_energy_" << i << '=' << format_real(report.patch_energies[i]) << '\n';
  for (std::size_t i = 0; i < report.distortions.size(); ++i)
    out << "distortion_" << i << '=' << format_real(report.distortions[i]) << '\n';
  out << "energy=" << format_real(report.energy) << '\n';
  out << "patch_energy_sum=" << format_real(report.patch_energy_sum) << '\n';
  out << "ratio=" << (report.degenerate ? std::string("degenerate") : format_real(report.ratio))
      << '\n';
  out << "trace_error=" << format_real(report.trace_error) << '\n';
  out << "constraint_violation=" << format_real(report.constraint_violation) << '\n';
  return out.str();
}

}  // namespace sobolev_glue
