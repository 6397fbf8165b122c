#include "inbetween/core/cholesky.hpp"

#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "inbetween/core/kernels.hpp"

namespace inbetween {
namespace {

std::optional<Matrix> try_factor(const Matrix& a, double jitter) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* lj = l.data() + j * n;
    double d = a(j, j) + jitter - kernels::dot(lj, lj, j);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double* li = l.data() + i * n;
      l(i, j) = (a(i, j) - kernels::dot(li, lj, j)) / ljj;
    }
  }
  return l;
}

}  // namespace

Cholesky::Cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError(fmt::format("cholesky: matrix {} is not square", a.shape_string()));
  }
  if (auto l = try_factor(a, 0.0)) {
    l_ = std::move(*l);
    return;
  }
  for (double jitter = kJitterStart; jitter <= kJitterMax * (1.0 + 1e-12); jitter *= 2.0) {
    if (auto l = try_factor(a, jitter)) {
      l_ = std::move(*l);
      jitter_ = jitter;
      return;
    }
  }
  throw NotPositiveDefinite(
      fmt::format("cholesky: {} matrix not positive definite with jitter up to {}",
                  a.shape_string(), kJitterMax));
}

Matrix Cholesky::solve_lower(const Matrix& b) const {
  const std::size_t n = dim();
  if (b.rows() != n) throw ShapeError("cholesky solve: row mismatch");
  Matrix y = b;
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* yi = y.data() + i * m;
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l_(i, k);
      if (lik != 0.0) kernels::axpy(-lik, y.data() + k * m, yi, m);
    }
    const double inv = 1.0 / l_(i, i);
    for (std::size_t c = 0; c < m; ++c) yi[c] *= inv;
  }
  return y;
}

Matrix Cholesky::solve_upper(const Matrix& b) const {
  const std::size_t n = dim();
  if (b.rows() != n) throw ShapeError("cholesky solve: row mismatch");
  Matrix x = b;
  const std::size_t m = b.cols();
  for (std::size_t ii = n; ii-- > 0;) {
    double* xi = x.data() + ii * m;
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double lki = l_(k, ii);
      if (lki != 0.0) kernels::axpy(-lki, x.data() + k * m, xi, m);
    }
    const double inv = 1.0 / l_(ii, ii);
    for (std::size_t c = 0; c < m; ++c) xi[c] *= inv;
  }
  return x;
}

Matrix Cholesky::solve(const Matrix& b) const { return solve_upper(solve_lower(b)); }

double Cholesky::log_det() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += std::log(l_(i, i));
  return 2.0 * s;
}

Matrix cholesky_solve(const Matrix& a, const Matrix& b) { return Cholesky(a).solve(b); }

}  // namespace inbetween
