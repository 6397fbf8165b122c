#include "inbetween/core/kernels.hpp"

#include <cmath>

namespace inbetween::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_scalar(const double* x, double* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) g[i] = 0.0;
  }
}

void hadamard_scalar(const double* a, const double* b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void hadamard_acc_scalar(const double* a, const double* b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void gauss_affine_scalar(const double* mean, const double* var, const double* eps, double* y,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = mean[i] + std::sqrt(var[i]) * eps[i];
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void gemm_acc_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                     std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      if (ai[p] != 0.0) axpy_scalar(ai[p], b + p * n, ci, n);
    }
  }
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{dot_scalar,      axpy_scalar,         relu_scalar,
                                 relu_mask_scalar, hadamard_scalar,    hadamard_acc_scalar,
                                 gauss_affine_scalar, sum_squares_scalar, gemm_acc_scalar};
  return table;
}

}  // namespace inbetween::kernels
