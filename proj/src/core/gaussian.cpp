#include "inbetween/core/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace inbetween {
namespace {

void validate(const GaussianMoments& m) {
  if (!std::isfinite(m.mean) || !std::isfinite(m.variance) || m.variance < 0.0) {
    throw std::invalid_argument(
        fmt::format("invalid Gaussian moments (mean={}, variance={})", m.mean, m.variance));
  }
}

}  // namespace

double std_normal_pdf(double r) noexcept {
  return std::exp(-0.5 * r * r) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double std_normal_cdf(double r) noexcept { return 0.5 * std::erfc(-r / std::numbers::sqrt2); }

double relu_variance_factor(double r) noexcept {
  // alpha(r) = Phi + r h - h^2 with h = N + r Phi. For r >= 0 the direct form
  // cancels catastrophically; rewrite with Q = Phi(-r), g = N - r Q:
  // alpha = 1 - Q - g (r + g).
  double alpha;
  if (r >= 0.0) {
    const double q = std_normal_cdf(-r);
    const double g = std_normal_pdf(r) - r * q;
    alpha = 1.0 - q - g * (r + g);
  } else {
    const double phi = std_normal_cdf(r);
    const double h = std_normal_pdf(r) + r * phi;
    alpha = phi + r * h - h * h;
  }
  return std::clamp(alpha, 0.0, 1.0);
}

double relu_gaussian_mean(const GaussianMoments& m) {
  validate(m);
  if (m.variance == 0.0) return std::max(0.0, m.mean);
  const double sd = std::sqrt(m.variance);
  const double r = m.mean / sd;
  return m.mean * std_normal_cdf(r) + sd * std_normal_pdf(r);
}

double relu_gaussian_var(const GaussianMoments& m) {
  validate(m);
  if (m.variance == 0.0) return 0.0;
  const double r = m.mean / std::sqrt(m.variance);
  return m.variance * relu_variance_factor(r);
}

double relu_gaussian_second_moment(const GaussianMoments& m) {
  const double mu = relu_gaussian_mean(m);
  return relu_gaussian_var(m) + mu * mu;
}

}  // namespace inbetween
