#include "inbetween/core/dataset.hpp"

#include <cmath>

#include <fmt/format.h>

namespace inbetween {

void Dataset::validate() const {
  if (x.rows() != y.size()) {
    throw ShapeError(fmt::format("dataset has {} input rows and {} targets", x.rows(), y.size()));
  }
}

Matrix Dataset::y_column() const { return Matrix::column_vector(y); }

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  validate();
  Dataset out{Matrix(rows.size(), x.cols()), std::vector<double>(rows.size()), norm};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= size()) throw std::out_of_range("dataset row index");
    auto src = x.row(r);
    std::copy(src.begin(), src.end(), out.x.row(i).begin());
    out.y[i] = y[r];
  }
  return out;
}

Normalization normalize(Dataset& data, bool targets) {
  data.validate();
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  if (n == 0) throw std::invalid_argument("cannot normalise an empty dataset");
  Normalization norm;
  norm.x_mean.assign(d, 0.0);
  norm.x_std.assign(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += data.x(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (data.x(r, c) - mean) * (data.x(r, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    norm.x_mean[c] = mean;
    norm.x_std[c] = sd > 0.0 ? sd : 1.0;
  }
  if (targets) {
    double mean = 0.0;
    for (double v : data.y) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : data.y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    norm.y_mean = mean;
    norm.y_std = sd > 0.0 ? sd : 1.0;
  }
  norm.applied = true;
  apply_normalization(norm, data);
  return norm;
}

void apply_normalization(const Normalization& norm, Dataset& data) {
  data.validate();
  if (norm.x_mean.size() != data.dim()) throw ShapeError("normalization dimension mismatch");
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < data.dim(); ++c) {
      data.x(r, c) = (data.x(r, c) - norm.x_mean[c]) / norm.x_std[c];
    }
    data.y[r] = (data.y[r] - norm.y_mean) / norm.y_std;
  }
  data.norm = norm;
}

}  // namespace inbetween
