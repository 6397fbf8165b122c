#pragma once

#include <span>
#include <vector>

#include "inbetween/core/matrix.hpp"

namespace inbetween {

/// Per-column affine map x -> (x - mean) / std applied to inputs and target.
struct Normalization {
  std::vector<double> x_mean;
  std::vector<double> x_std;
  double y_mean = 0.0;
  double y_std = 1.0;
  bool applied = false;
};

/// Regression data: N x D inputs, N targets.
struct Dataset {
  Matrix x;
  std::vector<double> y;
  Normalization norm;

  [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return x.cols(); }
  /// Throws ShapeError when x.rows() != y.size().
  void validate() const;
  /// Targets as an N x 1 matrix.
  [[nodiscard]] Matrix y_column() const;
  /// Rows selected by index, sharing this dataset's normalization record.
  [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const;
};

/// Fits column statistics (population std; constant columns get std 1) and
/// normalises in place.
Normalization normalize(Dataset& data, bool targets = true);
/// Applies an existing normalization to another dataset.
void apply_normalization(const Normalization& norm, Dataset& data);

}  // namespace inbetween
