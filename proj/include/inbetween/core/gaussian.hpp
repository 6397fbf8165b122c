#pragma once

namespace inbetween {

/// Mean and variance of a scalar Gaussian.
struct GaussianMoments {
  double mean = 0.0;
  double variance = 0.0;

  friend bool operator==(const GaussianMoments&, const GaussianMoments&) = default;
};

double std_normal_pdf(double r) noexcept;
/// erfc-based, absolute error well below 1e-12 everywhere.
double std_normal_cdf(double r) noexcept;

/// E[relu(a)] for a ~ N(m.mean, m.variance). Exact at variance 0.
double relu_gaussian_mean(const GaussianMoments& m);
/// Var[relu(a)]; always in [0, m.variance].
double relu_gaussian_var(const GaussianMoments& m);
/// E[relu(a)^2] = var + mean^2.
double relu_gaussian_second_moment(const GaussianMoments& m);

/// Var[relu(a)] / Var[a] as a function of r = mean/sd.
double relu_variance_factor(double r) noexcept;

}  // namespace inbetween
