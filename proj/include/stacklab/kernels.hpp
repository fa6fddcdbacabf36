#pragma once

// Dense double-precision inner loops used by the solver, the learners and the
// trajectory accumulators. Every kernel has a scalar reference version; an
// AVX2/FMA version is compiled on x86-64 and selected at runtime when the CPU
// supports it. Set STACKLAB_KERNELS=scalar to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace stacklab::kernels {

struct KernelTable {
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = M x, M row-major rows x cols
  void (*gemv)(const double* m, std::size_t rows, std::size_t cols,
               const double* x, double* out);
  // out = v^T M, M row-major rows x cols
  void (*gevm)(const double* v, const double* m, std::size_t rows,
               std::size_t cols, double* out);
  // acc += scale * x y^T, acc row-major nx x ny
  void (*outer_acc)(double* acc, const double* x, std::size_t nx,
                    const double* y, std::size_t ny, double scale);
};

const KernelTable& scalar_table();
// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();
bool cpu_supports_avx2();

// The table chosen for this process (first call decides).
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace stacklab::kernels
