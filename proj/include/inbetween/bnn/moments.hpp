#pragma once

#include <span>
#include <vector>

#include "inbetween/bnn/network.hpp"
#include "inbetween/core/gaussian.hpp"

namespace inbetween {

/// Monte Carlo predictive statistics, each N x K. var is the unbiased
/// (M - 1 denominator) sample variance of f(x).
struct PredictiveMoments {
  Matrix mean;
  Matrix var;
  Matrix mean_se;
  Matrix var_se;
  std::size_t samples = 0;
};

/// Draw m uses rng.split(m), so results do not depend on evaluation order.
PredictiveMoments predictive_mc(const ParamDist& q, const Matrix& x, std::size_t samples,
                                const RngStream& rng);

/// Exact output moments of a one-hidden-layer FFG network at x.
std::vector<GaussianMoments> closed_form_1hl_moments(const FFGParams& q,
                                                     std::span<const double> x);
/// Exact output moments of a one-hidden-layer MCDO network with inputs kept.
std::vector<GaussianMoments> closed_form_1hl_moments_mcdo(const MCDOParams& q,
                                                          std::span<const double> x);

/// Closed-form mean and variance of output `k` on every row of x.
struct MomentCurves {
  std::vector<double> mean;
  std::vector<double> var;
};
MomentCurves closed_form_curves(const ParamDist& q, const Matrix& x, std::size_t k = 0);

/// True when the closed forms above apply to q.
bool has_closed_form(const ParamDist& q);

}  // namespace inbetween
