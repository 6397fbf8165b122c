#include "inbetween/core/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace inbetween::kernels {

const KernelTable* avx2_table_impl() noexcept;

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct Dispatch {
  const KernelTable* table;
  Isa isa;
};

Dispatch select() noexcept {
  const char* env = std::getenv("INBETWEEN_SIMD");
  const bool force_scalar = env != nullptr && std::strcmp(env, "scalar") == 0;
  if (!force_scalar && cpu_has_avx2()) {
    if (const KernelTable* t = avx2_table_impl()) return {t, Isa::kAvx2};
  }
  return {&scalar_table(), Isa::kScalar};
}

Dispatch& current() noexcept {
  static Dispatch d = select();
  return d;
}

}  // namespace

const KernelTable* avx2_table() noexcept {
  return cpu_has_avx2() ? avx2_table_impl() : nullptr;
}

const KernelTable& active() noexcept { return *current().table; }

Isa active_isa() noexcept { return current().isa; }

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

void force_isa(Isa isa) {
  if (isa == Isa::kScalar) {
    current() = {&scalar_table(), Isa::kScalar};
    return;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr) throw std::runtime_error("AVX2 kernels unavailable on this CPU");
  current() = {t, Isa::kAvx2};
}

namespace {

void scale_output(double* c, std::size_t count, double beta) {
  if (beta == 0.0) {
    std::memset(c, 0, count * sizeof(double));
  } else if (beta != 1.0) {
    for (std::size_t i = 0; i < count; ++i) c[i] *= beta;
  }
}

std::vector<double> transpose_copy(const double* x, std::size_t rows, std::size_t cols) {
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = x[r * cols + c];
  }
  return t;
}

}  // namespace

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, double beta) {
  scale_output(c, m * n, beta);
  active().gemm_acc(a, b, c, m, k, n);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, double beta) {
  scale_output(c, k * n, beta);
  const std::vector<double> at = transpose_copy(a, m, k);
  active().gemm_acc(at.data(), b, c, k, m, n);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, double beta) {
  scale_output(c, m * n, beta);
  const std::vector<double> bt = transpose_copy(b, n, k);
  active().gemm_acc(a, bt.data(), c, m, k, n);
}

}  // namespace inbetween::kernels
