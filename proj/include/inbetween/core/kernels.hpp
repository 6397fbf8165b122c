#pragma once

// Data-parallel inner loops used by the dense layers, the autodiff tape and
// the Monte Carlo estimators. Every kernel has a scalar reference version and
// an AVX2/FMA version; the active table is picked once at startup from CPUID
// (override with INBETWEEN_SIMD=scalar).

#include <cstddef>
#include <string_view>

namespace inbetween::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y[i] = max(0, x[i])
  void (*relu)(const double* x, double* y, std::size_t n);
  /// g[i] = x[i] > 0 ? g[i] : 0   (in place ReLU backward)
  void (*relu_mask)(const double* x, double* g, std::size_t n);
  /// y[i] = a[i] * b[i]
  void (*hadamard)(const double* a, const double* b, double* y, std::size_t n);
  /// y[i] += a[i] * b[i]
  void (*hadamard_acc)(const double* a, const double* b, double* y, std::size_t n);
  /// y[i] = mean[i] + sqrt(var[i]) * eps[i]
  void (*gauss_affine)(const double* mean, const double* var, const double* eps, double* y,
                       std::size_t n);
  /// sum_i x[i]^2
  double (*sum_squares)(const double* x, std::size_t n);
  /// C(m x n) += A(m x k) * B(k x n), row-major with leading dims k and n.
  void (*gemm_acc)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                   std::size_t n);
};

/// Scalar reference kernels (always available).
const KernelTable& scalar_table() noexcept;
/// AVX2 kernels, or nullptr if the binary or CPU lacks support.
const KernelTable* avx2_table() noexcept;

/// Table selected at startup.
const KernelTable& active() noexcept;
Isa active_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// Forces a table (tests and benchmarks only; not thread safe).
void force_isa(Isa isa);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}

/// C(m x n) = A(m x k) * B(k x n) + beta * C, all row-major.
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, double beta);
/// C(k x n) = A(m x k)^T * B(m x n) + beta * C.
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, double beta);
/// C(m x n) = A(m x k) * B(n x k)^T + beta * C.
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, double beta);

}  // namespace inbetween::kernels
