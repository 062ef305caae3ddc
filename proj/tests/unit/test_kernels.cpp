#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "sobolev_glue/kernels.hpp"

using namespace sobolev_glue::kernels;

namespace {

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

std::vector<double> positive(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(u(rng));
  return v;
}

}  // namespace

TEST_CASE("active kernel table is one of the known variants") {
  const auto name = active_kernels().name;
  CHECK((name == scalar_kernels().name || (avx2_kernels() && name == avx2_kernels()->name)));
}

TEST_CASE("scalar pow_ratio_sum matches a direct loop") {
  std::vector<double> a{0.0, 1.0, 4.0}, b{2.0, 2.0, 0.5};
  const double expected = std::pow(1.0, 1.5) / std::pow(2.0, 0.75) + std::pow(4.0, 1.5) / std::pow(0.5, 0.75);
  CHECK(scalar_kernels().pow_ratio_sum(a.data(), b.data(), 3, 1.5, 0.75) == doctest::Approx(expected));
}

TEST_CASE("scalar dirichlet_weights handles zero cells") {
  std::vector<double> sq{0.0, 4.0}, w(2);
  const double e = scalar_kernels().dirichlet_weights(sq.data(), 2, 3.0, 0.5, w.data());
  CHECK(e == doctest::Approx(0.5 * 8.0));
  CHECK(w[0] == 0.0);
  CHECK(w[1] == doctest::Approx(0.5 * 3.0 * 2.0));
}

TEST_CASE("scalar accumulate_sq_diff uses the minimum image") {
  std::vector<double> y{0.1, 0.9}, out{0.0, 0.0};
  scalar_kernels().accumulate_sq_diff(0.05, y.data(), 2, 1.0, out.data());
  CHECK(out[0] == doctest::Approx(0.0025));
  CHECK(out[1] == doctest::Approx(0.0225));
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const KernelTable* simd = avx2_kernels();
  if (!simd) {
    MESSAGE("AVX2 variant unavailable on this build or CPU");
    return;
  }
  const KernelTable& ref = scalar_kernels();
  std::mt19937_64 rng(11);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 4099u}) {
    auto a = positive(rng, n, 1e-12, 1e6);
    auto b = positive(rng, n, 1e-8, 1e4);
    for (std::size_t i = 0; i < n; i += 7) a[i] = 0.0;
    for (double alpha : {0.5, 1.0, 1.25, 3.0})
      for (double beta : {0.5, 1.0, 1.75})
        CHECK(close(ref.pow_ratio_sum(a.data(), b.data(), n, alpha, beta),
                    simd->pow_ratio_sum(a.data(), b.data(), n, alpha, beta), 1e-12));

    auto sq = positive(rng, n, 1e-10, 1e5);
    for (std::size_t i = 0; i < n; i += 5) sq[i] = 0.0;
    for (double p : {1.1, 1.5, 2.0, 3.0, 4.5}) {
      std::vector<double> w0(n), w1(n);
      const double e0 = ref.dirichlet_weights(sq.data(), n, p, 0.37, w0.data());
      const double e1 = simd->dirichlet_weights(sq.data(), n, p, 0.37, w1.data());
      CHECK(close(e0, e1, 1e-12));
      for (std::size_t i = 0; i < n; ++i) CHECK(close(w0[i], w1[i], 1e-12));
      CHECK(close(e0, simd->dirichlet_weights(sq.data(), n, p, 0.37, nullptr), 1e-12));
    }

    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<double> hi(n), lo(n), d0(n), d1(n), s0(n, 0.25), s1(n, 0.25);
    for (std::size_t i = 0; i < n; ++i) {
      hi[i] = u(rng);
      lo[i] = u(rng);
    }
    ref.forward_diff_sq(hi.data(), lo.data(), n, 31.0, d0.data(), s0.data());
    simd->forward_diff_sq(hi.data(), lo.data(), n, 31.0, d1.data(), s1.data());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(d0[i] == d1[i]);
      CHECK(close(s0[i], s1[i], 1e-15));
    }

    for (double period : {0.0, 1.0, 6.283185307179586}) {
      std::vector<double> o0(n, 0.5), o1(n, 0.5);
      ref.accumulate_sq_diff(0.3, hi.data(), n, period, o0.data());
      simd->accumulate_sq_diff(0.3, hi.data(), n, period, o1.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(close(o0[i], o1[i], 1e-14));
    }
  }
}

TEST_CASE("AVX2 pow handles subnormal and extreme inputs") {
  const KernelTable* simd = avx2_kernels();
  if (!simd) return;
  std::vector<double> a{std::numeric_limits<double>::denorm_min(), 1e-300, 1e300, 1.0, 2.0},
      b{1.0, 1e-300, 1e300, 1e-5, 3.0};
  for (double alpha : {0.5, 1.0})
    CHECK(close(scalar_kernels().pow_ratio_sum(a.data(), b.data(), a.size(), alpha, 0.5),
                simd->pow_ratio_sum(a.data(), b.data(), a.size(), alpha, 0.5), 1e-12));
}
