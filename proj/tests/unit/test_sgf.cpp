#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/sgf.hpp"

using namespace sobolev_glue;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir() {
  const char* env = std::getenv("SOBOLEV_GLUE_TEST_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "sobolev_glue_tests";
  fs::create_directories(dir);
  return dir;
}
}  // namespace

TEST_CASE("reals print with enough digits to round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(parse_real(format_real(v)) == v);
  }
  CHECK(format_real(0.0) == "0");
  CHECK_THROWS_AS(parse_real("1.5x"), ParameterError);
}

TEST_CASE("SGF files round trip bit-identically") {
  const DomainSpec d(DomainKind::Box, {Axis{-0.5, 1.5, 7, false}, Axis{0.0, 2.0, 4, false}});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const GridMap m = sample_map<GridMap>(d, TargetSpec::sphere(3), [&](auto, auto out) {
    double s = 0;
    for (auto& v : out) {
      v = n01(rng);
      s += v * v;
    }
    for (auto& v : out) v /= std::sqrt(s);
  });
  const fs::path path = temp_dir() / "roundtrip.sgf";
  write_sgf(path, m, "unit test");
  const SgfContents back = read_sgf(path);
  CHECK(back.domain == d);
  CHECK(back.target == m.target());
  CHECK(back.provenance == "unit test");
  REQUIRE(back.values.size() == m.values().size());
  for (std::size_t i = 0; i < back.values.size(); ++i) CHECK(back.values[i] == m.values()[i]);
  CHECK(serialize_sgf(back.to_grid_map()) == serialize_sgf(m));
}

TEST_CASE("SGF header carries kind, nu, resolution and target") {
  const GridMap m = sample_map<GridMap>(DomainSpec::circle(3), TargetSpec::circle(), [](auto x, auto out) {
    out[0] = std::cos(x[0]);
    out[1] = std::sin(x[0]);
  });
  const std::string body = serialize_sgf(m);
  CHECK(body.rfind("SGF1 circle 2 3 circle\n", 0) == 0);
  const SgfContents c = parse_sgf(body, nullptr);
  CHECK(c.domain == m.domain());
}

TEST_CASE("malformed and missing SGF files are I/O errors") {
  CHECK_THROWS_AS(parse_sgf("SGF2 circle 1 4 euclidean\n", nullptr), IoError);
  CHECK_THROWS_AS(parse_sgf("SGF1 circle 1 4 euclidean\n0\n1\n2\n", nullptr), IoError);
  CHECK_THROWS_AS(read_sgf(temp_dir() / "does_not_exist.sgf"), IoError);
}
