#include <cstdlib>
#include <string_view>

#include "sobolev_glue/kernels.hpp"

namespace sobolev_glue::kernels {

#if defined(SOBOLEV_GLUE_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(SOBOLEV_GLUE_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* env = std::getenv("SOBOLEV_GLUE_SIMD");
    const std::string_view choice = env ? env : "auto";
    if (choice == "scalar") return scalar_kernels();
    if (const KernelTable* avx = avx2_kernels()) return *avx;
    return scalar_kernels();
  }();
  return table;
}

}  // namespace sobolev_glue::kernels
