#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sobolev_glue/acceptance.hpp"
#include "sobolev_glue/cli.hpp"
#include "sobolev_glue/cone.hpp"
#include "sobolev_glue/covering.hpp"
#include "sobolev_glue/sgf.hpp"

using namespace sobolev_glue;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const char* env = std::getenv("SOBOLEV_GLUE_TEST_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "sobolev_glue_tests";
  dir /= "cli";
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream(p, std::ios::binary) << body;
}

}  // namespace

TEST_CASE("parse errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"energy", "--kind", "dirichlet"}).code == 2);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("energy of a constant map") {
  const fs::path in = tmp_dir() / "const.sgf";
  write_sgf(in, sample_map<GridMap>(DomainSpec::square2d(9, 9), TargetSpec::euclidean(1),
                                    [](auto, auto out) { out[0] = 2.0; }));
  const Run r = run({"energy", "--kind", "dirichlet", "--p", "2", "--in", in.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "value=0\n");
  CHECK(run({"energy", "--kind", "gagliardo", "--p", "2", "--in", in.string()}).code == 2);
  CHECK(run({"energy", "--kind", "nope", "--p", "2", "--in", in.string()}).code == 2);
}

TEST_CASE("missing input is an I/O failure") {
  const Run r = run({"energy", "--kind", "dirichlet", "--p", "2", "--in",
                     (tmp_dir() / "does-not-exist.sgf").string()});
  CHECK(r.code == 5);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("fold writes output and rejects mismatched traces") {
  const fs::path dir = tmp_dir();
  auto [u0, u1] = random_fold_pair(17, 2, 4);
  write_sgf(dir / "u0.sgf", u0);
  write_sgf(dir / "u1.sgf", u1);
  const Run ok = run({"fold", "--u0", (dir / "u0.sgf").string(), "--u1", (dir / "u1.sgf").string(),
                      "--out", (dir / "folded.sgf").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("ratio=") != std::string::npos);
  CHECK(fs::exists(dir / "folded.sgf"));
  CHECK(fs::exists(dir / "folded.sgf.run"));

  auto [v0, v1] = random_fold_pair(17, 2, 5);
  write_sgf(dir / "v1.sgf", v1);
  const Run bad = run({"fold", "--u0", (dir / "u0.sgf").string(), "--u1",
                       (dir / "v1.sgf").string(), "--out", (dir / "bad.sgf").string()});
  CHECK(bad.code == 3);
}

TEST_CASE("cone certificate round trip") {
  const fs::path dir = tmp_dir();
  auto [F, G] = random_cone_instance(33, 11);
  write_file(dir / "F.set", serialize_set(F));
  write_file(dir / "G.set", serialize_set(G));
  const Run r = run({"cone", "--f", (dir / "F.set").string(), "--g", (dir / "G.set").string(),
                     "--out", (dir / "cert.txt").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("verified=true") != std::string::npos);
  const ConeCertificate cert = parse_cone(slurp(dir / "cert.txt"));
  CHECK(verify_cone(F, G, cert));
}

TEST_CASE("estimate writes a map and a reproducible run manifest") {
  const fs::path dir = tmp_dir();
  write_sgf(dir / "trace.sgf", circle_degree_trace(32, 1));
  write_file(dir / "cfg.txt", "max_iterations = 40\nseed = 3\ninit_noise = 0.01\n");
  auto est = [&](const std::string& name) {
    return run({"estimate", "--trace", (dir / "trace.sgf").string(), "--p", "2", "--cfg",
                (dir / "cfg.txt").string(), "--depth-nodes", "5", "--out", (dir / name).string()});
  };
  const Run a = est("a.sgf");
  const Run b = est("b.sgf");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out.find("energy=") != std::string::npos);
  CHECK(file_digest(dir / "a.sgf") == file_digest(dir / "b.sgf"));
  const std::string manifest = slurp(dir / "a.sgf.run");
  CHECK(manifest.find("subcommand=estimate") != std::string::npos);
  CHECK(manifest.find("seed=3") != std::string::npos);
  CHECK(manifest.find("output=" + (dir / "a.sgf").string() + " " + file_digest(dir / "a.sgf")) !=
        std::string::npos);
  CHECK(manifest.find(std::string("tool_version=") + kToolVersion) != std::string::npos);

  write_file(dir / "bad.txt", "nonsense = 1\n");
  CHECK(run({"estimate", "--trace", (dir / "trace.sgf").string(), "--p", "2", "--cfg",
             (dir / "bad.txt").string(), "--out", (dir / "c.sgf").string()})
            .code == 2);
}

TEST_CASE("glue over a circle covering") {
  const fs::path dir = tmp_dir();
  const TraceMap u = circle_degree_trace(64, 1);
  write_sgf(dir / "gtrace.sgf", u);
  const Covering cov = Covering::build(BaseManifold::Circle, 2);
  std::vector<std::string> args{"glue", "--base", "circle", "--k", "2", "--trace",
                                (dir / "gtrace.sgf").string()};
  for (int i = 0; i < cov.size(); ++i) {
    const GridMap patch =
        make_patch(cov, i, cov.patch_counts(i, u.domain()), Axis{0.0, 1.0, 9, false}, u.target(),
                   [&](auto b, double, auto out) {
                     u.evaluate_into(b, out);
                     u.target().project(out);
                   });
    const fs::path p = dir / ("patch" + std::to_string(i) + ".sgf");
    write_sgf(p, patch);
    args.push_back("--patch");
    args.push_back(p.string());
  }
  args.insert(args.end(), {"--out", (dir / "glued.sgf").string(), "--report",
                           (dir / "glue.txt").string()});
  const Run r = run(args);
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "glue.txt").find("r_1=") != std::string::npos);
  CHECK(fs::exists(dir / "glued.sgf.run"));
}

TEST_CASE("accept runs a selected criterion") {
  const fs::path out = tmp_dir() / "accept.txt";
  const Run r = run({"accept", "--suite", "primary", "--only", "1", "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("PASS 1 ", 0) == 0);
  CHECK(slurp(out).find("passed=1") != std::string::npos);
  CHECK(run({"accept", "--suite", "secondary"}).code == 2);
  CHECK(run({"accept", "--only", "11"}).code == 2);
}
