#include "sobolev_glue/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "sobolev_glue/acceptance.hpp"
#include "sobolev_glue/cone.hpp"
#include "sobolev_glue/covering.hpp"
#include "sobolev_glue/energy.hpp"
#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/estimator.hpp"
#include "sobolev_glue/folding.hpp"
#include "sobolev_glue/sgf.hpp"

namespace sobolev_glue {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << body;
  if (!out.flush()) throw IoError("cannot write " + path.string());
}

std::string hex_digest(const unsigned char* data, std::size_t n) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data, n, md, &len, EVP_sha256(), nullptr)) throw IoError("SHA-256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

class RunRecorder {
 public:
  RunRecorder(std::string subcommand, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.arguments = args;
  }

  void input(const fs::path& p) { manifest_.input_digests.emplace_back(p.string(), file_digest(p)); }
  void output(const fs::path& p) { manifest_.output_digests.emplace_back(p.string(), file_digest(p)); }
  void seed(std::uint64_t s) { manifest_.seed = s; }

  void write(const fs::path& primary_output) {
    manifest_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    fs::path run = primary_output;
    run += ".run";
    write_text(run, manifest_.serialize());
  }

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

TargetSpec penalty_manifold(int nu) {
  return nu == 2 ? TargetSpec::circle() : TargetSpec::sphere(nu);
}

int run_energy(const std::string& kind, double p, std::optional<double> s, std::optional<double> eps,
               const fs::path& in, std::ostream& out) {
  const SgfContents sgf = read_sgf(in);
  double value = 0.0;
  if (kind == "dirichlet") {
    value = dirichlet_p_energy(sgf.to_grid_map(), p).value;
  } else if (kind == "gagliardo") {
    if (!s) throw ParameterError("--s is required for the Gagliardo energy");
    value = gagliardo_energy(sgf.to_trace_map(), *s, p).value;
  } else if (kind == "penalized") {
    if (!eps) throw ParameterError("--eps is required for the penalized energy");
    const GridMap map(sgf.domain, TargetSpec::euclidean(sgf.target.nu()), sgf.values);
    const auto penalty = PenaltySpec::distance_power(penalty_manifold(sgf.target.nu()), *eps, p);
    value = penalized_energy(map, penalty, p).value;
  } else {
    throw ParameterError("--kind must be dirichlet, gagliardo or penalized");
  }
  out << "value=" << format_real(value) << '\n';
  return 0;
}

std::string fold_report_text(const FoldReport& r) {
  std::ostringstream out;
  out << "trace_bottom_error=" << format_real(r.trace_bottom_error) << '\n'
      << "trace_left_error=" << format_real(r.trace_left_error) << '\n'
      << "trace_right_error=" << format_real(r.trace_right_error) << '\n'
      << "energy_in_0=" << format_real(r.energy_in_0) << '\n'
      << "energy_in_1=" << format_real(r.energy_in_1) << '\n'
      << "energy_out=" << format_real(r.energy_out) << '\n'
      << "ratio=" << format_real(r.ratio) << '\n'
      << "p=" << format_real(r.p) << '\n'
      << "constraint_violation=" << format_real(r.constraint_violation) << '\n';
  return out.str();
}

std::vector<int> parse_id_list(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const double v = parse_real(item);
    if (v != std::floor(v) || v < 1 || v > kCriterionCount)
      throw ParameterError("--only expects criterion numbers 1.." + std::to_string(kCriterionCount));
    ids.push_back(static_cast<int>(v));
  }
  return ids;
}

}  // namespace

std::string RunManifest::serialize() const {
  std::ostringstream out;
  out << "subcommand=" << subcommand << '\n';
  out << "arguments=";
  for (std::size_t i = 0; i < arguments.size(); ++i) out << (i ? " " : "") << arguments[i];
  out << '\n';
  for (const auto& [path, digest] : input_digests) out << "input=" << path << ' ' << digest << '\n';
  for (const auto& [path, digest] : output_digests) out << "output=" << path << ' ' << digest << '\n';
  out << "tool_version=" << tool_version << '\n';
  out << "seed=" << seed << '\n';
  out << "seconds=" << format_real(seconds) << '\n';
  return out.str();
}

std::string file_digest(const fs::path& path) {
  const std::string body = read_text(path);
  return hex_digest(reinterpret_cast<const unsigned char*>(body.data()), body.size());
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sobolev extension gluing toolkit", "sobolev-glue"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // energy
  auto* energy = app.add_subcommand("energy", "Evaluate an energy of a map");
  std::string e_kind, e_in;
  double e_p = 2.0;
  std::optional<double> e_s, e_eps;
  energy->add_option("--kind", e_kind, "dirichlet | gagliardo | penalized")->required();
  energy->add_option("--p", e_p, "Integrability exponent")->required();
  energy->add_option("--s", e_s, "Fractional order (gagliardo)");
  energy->add_option("--eps", e_eps, "Penalty scale (penalized)");
  energy->add_option("--in", e_in, "Input SGF file")->required();

  // fold
  auto* foldc = app.add_subcommand("fold", "Fold two extensions sharing a bottom trace");
  std::string f_u0, f_u1, f_out;
  std::optional<double> f_tol;
  double f_p = 2.0;
  foldc->add_option("--u0", f_u0)->required();
  foldc->add_option("--u1", f_u1)->required();
  foldc->add_option("--out", f_out)->required();
  foldc->add_option("--trace-tol", f_tol);
  foldc->add_option("--p", f_p);

  // cone
  auto* cone = app.add_subcommand("cone", "Find and verify a cone certificate");
  std::string c_f, c_g, c_out;
  int c_ladder = 64;
  cone->add_option("--f", c_f, "Closed set file")->required();
  cone->add_option("--g", c_g, "Open set file")->required();
  cone->add_option("--out", c_out, "Certificate file")->required();
  cone->add_option("--ladder", c_ladder, "Radius ladder steps");

  // glue
  auto* gluec = app.add_subcommand("glue", "Glue patch extensions over a covering");
  std::string g_base, g_trace, g_out, g_report;
  int g_k = 2;
  std::vector<std::string> g_patches;
  double g_p = 2.0;
  std::optional<int> g_chart_res;
  bool g_warn_gaps = false;
  gluec->add_option("--base", g_base, "circle | torus")->required();
  gluec->add_option("--k", g_k, "Number of charts")->required();
  gluec->add_option("--trace", g_trace)->required();
  gluec->add_option("--patch", g_patches)->required();
  gluec->add_option("--p", g_p);
  gluec->add_option("--out", g_out)->required();
  gluec->add_option("--report", g_report)->required();
  gluec->add_option("--chart-res", g_chart_res, "Chart sampling resolution");
  gluec->add_flag("--warn-gaps", g_warn_gaps, "Count covering gaps instead of aborting");

  // estimate
  auto* est = app.add_subcommand("estimate", "Approximate an extension energy");
  std::string x_trace, x_cfg, x_out;
  double x_p = 2.0, x_depth = 1.0;
  bool x_penalized = false;
  std::optional<double> x_eps;
  std::optional<int> x_depth_nodes;
  est->add_option("--trace", x_trace)->required();
  est->add_option("--p", x_p)->required();
  est->add_flag("--penalized", x_penalized);
  est->add_option("--eps", x_eps);
  est->add_option("--depth", x_depth);
  est->add_option("--depth-nodes", x_depth_nodes);
  est->add_option("--cfg", x_cfg)->required();
  est->add_option("--out", x_out)->required();

  // accept
  auto* acc = app.add_subcommand("accept", "Run the acceptance suite");
  std::string a_suite = "primary", a_out, a_only;
  std::uint64_t a_seed = 0;
  acc->add_option("--suite", a_suite);
  acc->add_option("--out", a_out);
  acc->add_option("--seed", a_seed);
  acc->add_option("--only", a_only, "Comma-separated criterion numbers");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "energy") return run_energy(e_kind, e_p, e_s, e_eps, e_in, out);

    RunRecorder run(sub, args);
    if (sub == "fold") {
      const GridMap u0 = read_sgf(f_u0).to_grid_map();
      const GridMap u1 = read_sgf(f_u1).to_grid_map();
      run.input(f_u0);
      run.input(f_u1);
      auto [folded, report] = fold(u0, u1, FoldOptions{f_tol, f_p});
      write_sgf(f_out, folded, "fold");
      run.output(f_out);
      run.write(f_out);
      out << fold_report_text(report);
      return 0;
    }
    if (sub == "cone") {
      const SampledSet F = parse_set(read_text(c_f));
      const SampledSet G = parse_set(read_text(c_g));
      run.input(c_f);
      run.input(c_g);
      ConeOptions opts;
      opts.ladder_steps = c_ladder;
      const ConeCertificate cert = find_cone(F, G, opts);
      write_text(c_out, serialize_cone(cert));
      run.output(c_out);
      run.write(c_out);
      out << "r=" << format_real(cert.r) << '\n'
          << "direction_res=" << cert.direction_res << '\n'
          << "cone_size=" << cert.cone_size() << '\n'
          << "verified=" << (cert.verified ? "true" : "false") << '\n';
      return 0;
    }
    if (sub == "glue") {
      const BaseManifold base = base_manifold_from_string(g_base);
      const Covering cov = g_k == 1 ? Covering::single(base) : Covering::build(base, g_k);
      const TraceMap u = read_sgf(g_trace).to_trace_map();
      run.input(g_trace);
      std::vector<GridMap> patches;
      for (const std::string& p : g_patches) {
        patches.push_back(read_sgf(p).to_grid_map());
        run.input(p);
      }
      GlueOptions opts;
      opts.p = g_p;
      opts.chart_res = g_chart_res;
      opts.abort_on_gap = !g_warn_gaps;
      auto [U, report] = glue(cov, patches, u, opts);
      write_sgf(g_out, U, "glue");
      write_text(g_report, format_glue_report(report));
      run.output(g_out);
      run.output(g_report);
      run.write(g_out);
      out << "energy=" << format_real(report.energy) << '\n'
          << "ratio=" << (report.degenerate ? std::string("degenerate") : format_real(report.ratio))
          << '\n'
          << "trace_error=" << format_real(report.trace_error) << '\n';
      return 0;
    }
    if (sub == "estimate") {
      MinimizeConfig cfg;
      cfg.p = x_p;
      cfg = parse_minimize_config(read_text(x_cfg), cfg);
      cfg.p = x_p;
      cfg.validate();
      run.input(x_trace);
      run.input(x_cfg);
      run.seed(cfg.seed);
      const TraceMap u = read_sgf(x_trace).to_trace_map();
      const int nt = x_depth_nodes.value_or(
          std::max(3, static_cast<int>(std::lround(u.domain().axis(0).count * x_depth / 2.0)) + 1));
      MinimizeResult res = [&] {
        if (!x_penalized) return minimize_extension(u, nt, x_depth, cfg);
        if (!x_eps) throw ParameterError("--penalized needs --eps");
        cfg.projection = ProjectionMode::None;
        const auto penalty =
            PenaltySpec::distance_power(u.target().is_manifold() ? u.target() : penalty_manifold(u.nu()),
                                        *x_eps, x_p);
        return minimize_penalized(u, penalty, nt, x_depth, cfg);
      }();
      write_sgf(x_out, res.map, x_penalized ? "estimate-penalized" : "estimate");
      run.output(x_out);
      run.write(x_out);
      out << "energy=" << format_real(res.energy) << '\n'
          << "iterations=" << res.iterations << '\n'
          << "converged=" << (res.converged ? "true" : "false") << '\n';
      return 0;
    }
    // accept
    if (a_suite != "primary") throw ParameterError("--suite must be 'primary'");
    AcceptanceOptions opts;
    opts.seed = a_seed;
    opts.only = parse_id_list(a_only);
    const auto results = run_acceptance(
        opts, [&](const CriterionResult& r) { out << format_criterion_line(r) << std::endl; });
    const bool all = std::all_of(results.begin(), results.end(), [](auto& r) { return r.passed; });
    if (!a_out.empty()) {
      write_text(a_out, format_acceptance_report(results));
      run.seed(a_seed);
      run.output(a_out);
      run.write(a_out);
    }
    return all ? 0 : 4;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace sobolev_glue
