#pragma once

// Data-parallel inner loops of the energy functionals. Each kernel has a
// scalar reference and an AVX2/FMA variant; the variant is picked once at
// startup from the CPU features, overridable with SOBOLEV_GLUE_SIMD=scalar|avx2.
// Variants agree to ~1e-13 relative (different summation order and
// polynomial exp/log instead of libm).

#include <cstddef>
#include <string_view>

namespace sobolev_glue::kernels {

struct KernelTable {
  std::string_view name;

  /// sum_i a2[i]^alpha * b2[i]^(-beta). Terms with a2[i] == 0 contribute 0.
  /// Requires alpha > 0 and b2[i] > 0.
  double (*pow_ratio_sum)(const double* a2, const double* b2, std::size_t n, double alpha,
                          double beta);

  /// Per-cell p-Dirichlet density from squared Jacobian norms:
  /// returns sum_i vol * sq[i]^(p/2); if `weights` is non-null stores
  /// vol * p * sq[i]^(p/2 - 1) (0 where sq[i] == 0).
  double (*dirichlet_weights)(const double* sq, std::size_t n, double p, double vol,
                              double* weights);

  /// diff[i] = (hi[i] - lo[i]) * inv_h; sq[i] += diff[i]^2.
  void (*forward_diff_sq)(const double* hi, const double* lo, std::size_t n, double inv_h,
                          double* diff, double* sq);

  /// out[i] += d(x, y[i])^2 with d the minimum-image distance for period > 0,
  /// plain |x - y[i]| for period == 0.
  void (*accumulate_sq_diff)(double x, const double* y, std::size_t n, double period,
                             double* out);
};

const KernelTable& scalar_kernels();
/// nullptr when the binary or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();
/// Selected once per process.
const KernelTable& active_kernels();

}  // namespace sobolev_glue::kernels
