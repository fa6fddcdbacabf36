#include "stacklab/kernels.hpp"

#include <cstdlib>
#include <string>

namespace stacklab::kernels {

#ifndef STACKLAB_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("STACKLAB_KERNELS");
    const std::string want = env ? env : "auto";
    if (want != "scalar" && avx2_table() != nullptr && cpu_supports_avx2()) {
      return *avx2_table();
    }
    return scalar_table();
  }();
  return chosen;
}

}  // namespace stacklab::kernels
