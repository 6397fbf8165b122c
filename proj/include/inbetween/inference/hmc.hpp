#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "inbetween/bnn/moments.hpp"
#include "inbetween/core/dataset.hpp"
#include "inbetween/inference/objectives.hpp"

namespace inbetween {

struct HmcConfig {
  double step_size = 0.01;
  std::size_t leapfrog_steps = 20;
  std::size_t warmup = 1000;
  std::size_t samples = 1000;
  /// Scalar mass: momentum ~ N(0, mass I).
  double mass = 1.0;
  /// Keep every thin-th post-warmup state.
  std::size_t thin = 1;
  /// Step size is multiplied by U(1 - jitter, 1 + jitter) each iteration.
  double jitter = 0.1;
  /// Warmup acceptance is assessed over windows of this many iterations:
  /// below 0.6 halves the step, above 0.9 doubles it.
  std::size_t adapt_window = 50;
};

/// Returns log density at q and writes its gradient into grad.
using LogDensityFn = std::function<double(std::span<const double> q, std::span<double> grad)>;

struct HmcChain {
  std::vector<std::vector<double>> samples;
  std::vector<double> log_density;
  double acceptance_rate = 0.0;
  double step_size = 0.0;
  std::size_t divergent = 0;
};

class HmcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Leapfrog HMC with Metropolis correction. Throws HmcError if no proposal
/// is accepted after warmup.
HmcChain hmc_sample(const LogDensityFn& log_density, std::vector<double> init,
                    const HmcConfig& cfg, RngStream& rng);

/// Log posterior of a ReLU regression network with the scaled Gaussian
/// prior, in whitened coordinates z = theta / prior_std. Flat order is
/// [W_0, b_0, W_1, b_1, ...], row-major.
struct BnnPosterior {
  NetworkSpec spec;
  PriorConfig prior;
  Dataset data;
  Likelihood lik;

  [[nodiscard]] std::size_t dim() const;
  [[nodiscard]] std::vector<double> prior_std() const;
  [[nodiscard]] NetworkParams unwhiten(std::span<const double> z) const;
  /// Log density (up to a constant) and gradient in z.
  double operator()(std::span<const double> z, std::span<double> grad) const;
};

struct BnnHmcResult {
  std::vector<NetworkParams> samples;
  HmcChain chain;
};

/// Posterior samples of network weights, initialised from a prior draw.
BnnHmcResult hmc_sample(const NetworkSpec& spec, const PriorConfig& prior, const Dataset& data,
                        const Likelihood& lik, const HmcConfig& cfg, RngStream& rng);

/// Empirical mean and variance of f over parameter samples.
PredictiveMoments predictive_from_samples(const std::vector<NetworkParams>& samples,
                                          const Matrix& x);

/// Split-chain variance ratio (R-hat) of a scalar trace.
double split_rhat(std::span<const double> trace);

nlohmann::json to_json(const HmcConfig& cfg);

}  // namespace inbetween
