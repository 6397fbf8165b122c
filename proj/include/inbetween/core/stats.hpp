#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace inbetween {

/// Streaming mean/variance with standard errors. Power sums are taken about
/// the first observation, which keeps them well conditioned.
class RunningMoments {
 public:
  void add(double x) noexcept;

  [[nodiscard]] std::size_t count() const noexcept { return n_; }
  [[nodiscard]] double mean() const noexcept;
  /// Unbiased sample variance; 0 for fewer than two observations.
  [[nodiscard]] double variance() const noexcept;
  [[nodiscard]] double mean_se() const noexcept;
  /// Large-sample standard error of variance(): sqrt((m4 - m2^2) / n).
  [[nodiscard]] double variance_se() const noexcept;

 private:
  std::size_t n_ = 0;
  double shift_ = 0.0;
  double s1_ = 0.0;
  double s2_ = 0.0;
  double s3_ = 0.0;
  double s4_ = 0.0;
};

double mean_of(std::span<const double> x);
/// Unbiased sample variance.
double variance_of(std::span<const double> x);
/// Linear-interpolated quantile, q in [0, 1]; x need not be sorted.
double quantile(std::span<const double> x, double q);

/// min, lower quartile, median, upper quartile, max.
struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};
BoxStats box_stats(std::span<const double> x);

}  // namespace inbetween
