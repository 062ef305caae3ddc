// AVX2 + FMA kernels. Compile with: -mavx2 -mfma

#include <immintrin.h>

#include <cfloat>
#include <cmath>

#include "sobolev_glue/kernels.hpp"

namespace sobolev_glue::kernels {

namespace {

inline __m256d polevl(__m256d x, const double* c, int degree) {
  __m256d acc = _mm256_set1_pd(c[0]);
  for (int i = 1; i <= degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

// Monic: x^degree + c[0] x^(degree-1) + ... + c[degree-1].
inline __m256d p1evl(__m256d x, const double* c, int degree) {
  __m256d acc = _mm256_add_pd(x, _mm256_set1_pd(c[0]));
  for (int i = 1; i < degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

// Natural log for positive normal inputs (Cephes rational approximation).
inline __m256d log_pd(__m256d x) {
  static const double P[] = {1.01875663804580931796E-4, 4.97494994976747001425E-1,
                             4.70579119878881725854E0,  1.44989225341610930846E1,
                             1.79368678507819816313E1,  7.70838733755885391666E0};
  static const double Q[] = {1.12873587189167450590E1, 4.52279145837532221105E1,
                             8.29875266912776603211E1, 7.11544750618563894466E1,
                             2.31251620126765340583E1};
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256i packed =
      _mm256_permutevar8x32_epi32(exp_bits, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0));
  __m256d e = _mm256_sub_pd(_mm256_cvtepi32_pd(_mm256_castsi256_si128(packed)),
                            _mm256_set1_pd(1022.0));
  const __m256i mant_bits =
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FE0000000000000LL));
  const __m256d m = _mm256_castsi256_pd(mant_bits);  // [0.5, 1)
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
  const __m256d r =
      _mm256_add_pd(_mm256_sub_pd(m, _mm256_set1_pd(1.0)), _mm256_and_pd(small, m));
  const __m256d z = _mm256_mul_pd(r, r);
  __m256d y = _mm256_mul_pd(r, _mm256_div_pd(_mm256_mul_pd(z, polevl(r, P, 5)), p1evl(r, Q, 5)));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d out = _mm256_add_pd(r, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), out);
}

// exp with Cephes Pade kernel; underflows to 0 below -708.39.
inline __m256d exp_pd(__m256d x) {
  static const double P[] = {1.26177193074810590878E-4, 3.02994407707441961300E-2,
                             9.99999999999999999910E-1};
  static const double Q[] = {3.00198505138664455042E-6, 2.52448340349684104192E-3,
                             2.27265548208155028766E-1, 2.00000000000000000009E0};
  const __m256d lo = _mm256_set1_pd(-708.39641853226410622);
  const __m256d hi = _mm256_set1_pd(709.78271289338399678);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);
  const __m256d n = _mm256_round_pd(
      _mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  x = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), x);
  const __m256d xx = _mm256_mul_pd(x, x);
  const __m256d px = _mm256_mul_pd(x, polevl(xx, P, 2));
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(polevl(xx, Q, 3), px));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));
  // 2^n: n in [-1022, 1024]; split to keep the biased exponent in range.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m128i half = _mm_srai_epi32(n32, 1);
  const __m128i rest = _mm_sub_epi32(n32, half);
  auto pow2 = [](__m128i k) {
    __m256i k64 = _mm256_cvtepi32_epi64(k);
    k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(k64, 52));
  };
  r = _mm256_mul_pd(_mm256_mul_pd(r, pow2(half)), pow2(rest));
  r = _mm256_andnot_pd(under, r);
  return _mm256_blendv_pd(r, _mm256_set1_pd(HUGE_VAL), over);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Lanes that are zero or normal; denormal lanes fall back to libm.
inline bool all_zero_or_normal(__m256d v) {
  const __m256d tiny = _mm256_cmp_pd(v, _mm256_set1_pd(DBL_MIN), _CMP_LT_OQ);
  const __m256d zero = _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_EQ_OQ);
  return _mm256_movemask_pd(_mm256_andnot_pd(zero, tiny)) == 0;
}

double pow_ratio_sum(const double* a2, const double* b2, std::size_t n, double alpha,
                     double beta) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  double tail = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(a2 + i);
    const __m256d b = _mm256_loadu_pd(b2 + i);
    if (!all_zero_or_normal(a)) {
      for (std::size_t j = i; j < i + 4; ++j)
        if (a2[j] != 0.0) tail += std::pow(a2[j], alpha) * std::pow(b2[j], -beta);
      continue;
    }
    const __m256d is_zero = _mm256_cmp_pd(a, zero, _CMP_EQ_OQ);
    const __m256d safe_a = _mm256_blendv_pd(a, _mm256_set1_pd(1.0), is_zero);
    const __m256d t = exp_pd(_mm256_fmsub_pd(va, log_pd(safe_a), _mm256_mul_pd(vb, log_pd(b))));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(is_zero, t));
  }
  for (; i < n; ++i)
    if (a2[i] != 0.0) tail += std::pow(a2[i], alpha) * std::pow(b2[i], -beta);
  return hsum(acc) + tail;
}

double dirichlet_weights(const double* sq, std::size_t n, double p, double vol,
                         double* weights) {
  const __m256d vhalf = _mm256_set1_pd(0.5 * p);
  const __m256d vvol = _mm256_set1_pd(vol);
  const __m256d vwp = _mm256_set1_pd(vol * p);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = zero;
  double tail = 0.0;
  auto scalar_one = [&](std::size_t j) {
    if (sq[j] == 0.0) {
      if (weights) weights[j] = 0.0;
      return;
    }
    const double e = std::pow(sq[j], 0.5 * p);
    tail += vol * e;
    if (weights) weights[j] = vol * p * e / sq[j];
  };
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_loadu_pd(sq + i);
    if (!all_zero_or_normal(s)) {
      for (std::size_t j = i; j < i + 4; ++j) scalar_one(j);
      continue;
    }
    const __m256d is_zero = _mm256_cmp_pd(s, zero, _CMP_EQ_OQ);
    const __m256d safe = _mm256_blendv_pd(s, one, is_zero);
    const __m256d e = _mm256_andnot_pd(is_zero, exp_pd(_mm256_mul_pd(vhalf, log_pd(safe))));
    acc = _mm256_fmadd_pd(vvol, e, acc);
    if (weights) _mm256_storeu_pd(weights + i, _mm256_div_pd(_mm256_mul_pd(vwp, e), safe));
  }
  for (; i < n; ++i) scalar_one(i);
  return hsum(acc) + tail;
}

void forward_diff_sq(const double* hi, const double* lo, std::size_t n, double inv_h,
                     double* diff, double* sq) {
  const __m256d vh = _mm256_set1_pd(inv_h);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(hi + i), _mm256_loadu_pd(lo + i)), vh);
    _mm256_storeu_pd(diff + i, d);
    _mm256_storeu_pd(sq + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(sq + i)));
  }
  for (; i < n; ++i) {
    const double d = (hi[i] - lo[i]) * inv_h;
    diff[i] = d;
    sq[i] += d * d;
  }
}

void accumulate_sq_diff(double x, const double* y, std::size_t n, double period,
                        double* out) {
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d vp = _mm256_set1_pd(period);
  const bool wrap = period > 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(vx, _mm256_loadu_pd(y + i)));
    if (wrap) d = _mm256_min_pd(d, _mm256_sub_pd(vp, d));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) {
    double d = std::abs(x - y[i]);
    if (wrap) d = std::fmin(d, period - d);
    out[i] += d * d;
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", &pow_ratio_sum, &dirichlet_weights, &forward_diff_sq,
                                 &accumulate_sq_diff};
  return table;
}

}  // namespace sobolev_glue::kernels
