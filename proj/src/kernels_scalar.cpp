#include "stacklab/kernels.hpp"

namespace stacklab::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* m, std::size_t rows, std::size_t cols,
                 const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_scalar(m + r * cols, x, cols);
}

void gevm_scalar(const double* v, const double* m, std::size_t rows,
                 std::size_t cols, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(v[r], m + r * cols, out, cols);
}

void outer_acc_scalar(double* acc, const double* x, std::size_t nx,
                      const double* y, std::size_t ny, double scale) {
  for (std::size_t i = 0; i < nx; ++i) axpy_scalar(scale * x[i], y, acc + i * ny, ny);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",    dot_scalar,  axpy_scalar,
                                 gemv_scalar, gevm_scalar, outer_acc_scalar};
  return table;
}

}  // namespace stacklab::kernels
