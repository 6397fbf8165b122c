#pragma once

#include <stdexcept>

#include "inbetween/core/matrix.hpp"

namespace inbetween {

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jitter added to the diagonal on failure: 1e-10, doubling, up to 1e-4.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;

/// Lower-triangular factor L with L L^T = A + jitter I.
class Cholesky {
 public:
  Cholesky() = default;
  explicit Cholesky(const Matrix& a);

  [[nodiscard]] const Matrix& lower() const noexcept { return l_; }
  [[nodiscard]] double jitter() const noexcept { return jitter_; }
  [[nodiscard]] std::size_t dim() const noexcept { return l_.rows(); }

  /// X with (A + jitter I) X = B.
  [[nodiscard]] Matrix solve(const Matrix& b) const;
  /// Y with L Y = B.
  [[nodiscard]] Matrix solve_lower(const Matrix& b) const;
  /// X with L^T X = B.
  [[nodiscard]] Matrix solve_upper(const Matrix& b) const;
  [[nodiscard]] double log_det() const;

 private:
  Matrix l_;
  double jitter_ = 0.0;
};

/// Solves A X = B for symmetric positive-definite A.
Matrix cholesky_solve(const Matrix& a, const Matrix& b);

}  // namespace inbetween
