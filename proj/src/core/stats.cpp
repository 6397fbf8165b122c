#include "inbetween/core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inbetween {

void RunningMoments::add(double x) noexcept {
  if (n_ == 0) shift_ = x;
  const double d = x - shift_;
  const double d2 = d * d;
  ++n_;
  s1_ += d;
  s2_ += d2;
  s3_ += d2 * d;
  s4_ += d2 * d2;
}

double RunningMoments::mean() const noexcept {
  return n_ == 0 ? 0.0 : shift_ + s1_ / static_cast<double>(n_);
}

double RunningMoments::variance() const noexcept {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  const double m1 = s1_ / n;
  return std::max(0.0, (s2_ - n * m1 * m1) / (n - 1.0));
}

double RunningMoments::mean_se() const noexcept {
  return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

double RunningMoments::variance_se() const noexcept {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  const double a1 = s1_ / n;
  const double a2 = s2_ / n;
  const double a3 = s3_ / n;
  const double a4 = s4_ / n;
  const double m2 = a2 - a1 * a1;
  const double m4 = a4 - 4.0 * a1 * a3 + 6.0 * a1 * a1 * a2 - 3.0 * a1 * a1 * a1 * a1;
  return std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
}

double mean_of(std::span<const double> x) {
  RunningMoments r;
  for (double v : x) r.add(v);
  return r.mean();
}

double variance_of(std::span<const double> x) {
  RunningMoments r;
  for (double v : x) r.add(v);
  return r.variance();
}

double quantile(std::span<const double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

BoxStats box_stats(std::span<const double> x) {
  return {quantile(x, 0.0), quantile(x, 0.25), quantile(x, 0.5), quantile(x, 0.75),
          quantile(x, 1.0)};
}

}  // namespace inbetween
