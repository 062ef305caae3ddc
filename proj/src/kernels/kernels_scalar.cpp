#include <cmath>

#include "sobolev_glue/kernels.hpp"

namespace sobolev_glue::kernels {

namespace {

double pow_ratio_sum(const double* a2, const double* b2, std::size_t n, double alpha,
                     double beta) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a2[i] == 0.0) continue;
    sum += std::pow(a2[i], alpha) * std::pow(b2[i], -beta);
  }
  return sum;
}

double dirichlet_weights(const double* sq, std::size_t n, double p, double vol,
                         double* weights) {
  const double half = 0.5 * p;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sq[i] == 0.0) {
      if (weights) weights[i] = 0.0;
      continue;
    }
    const double e = std::pow(sq[i], half);
    sum += vol * e;
    if (weights) weights[i] = vol * p * e / sq[i];
  }
  return sum;
}

void forward_diff_sq(const double* hi, const double* lo, std::size_t n, double inv_h,
                     double* diff, double* sq) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (hi[i] - lo[i]) * inv_h;
    diff[i] = d;
    sq[i] += d * d;
  }
}

void accumulate_sq_diff(double x, const double* y, std::size_t n, double period,
                        double* out) {
  if (period > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      double d = std::abs(x - y[i]);
      d = std::fmin(d, period - d);
      out[i] += d * d;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x - y[i];
      out[i] += d * d;
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &pow_ratio_sum, &dirichlet_weights,
                                 &forward_diff_sq, &accumulate_sq_diff};
  return table;
}

}  // namespace sobolev_glue::kernels
