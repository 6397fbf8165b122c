#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "inbetween/experiments/config.hpp"
#include "inbetween/gp/nngp.hpp"
#include "inbetween/inference/hmc.hpp"
#include "inbetween/inference/train.hpp"

namespace inbetween {

/// Everything that determines one (method, depth, seed) fit.
struct CellSetup {
  NetworkSpec spec;
  PriorConfig prior;
  Likelihood lik;
  double dropout_p = 0.05;
  ScaleConfig scale;
  std::uint64_t seed = 0;

  [[nodiscard]] NngpKernelConfig kernel() const;
};

/// Latent predictive mean and variance of f at the evaluation rows.
struct Prediction {
  std::vector<double> mean;
  std::vector<double> var;
  /// Method diagnostics (final loss, HMC acceptance, ...).
  nlohmann::json info = nlohmann::json::object();
  std::vector<LossPoint> trace;
  /// HMC only: log density at each kept post-warmup sample, `chain_thin` apart.
  std::vector<double> chain;
  std::size_t chain_thin = 1;
};

/// Default initialisations: MFVI small-variance init, MCDO uniform init.
ParamDist initial_dist(Method m, const CellSetup& setup);
/// Trains MFVI (negative ELBO) or MCDO (dropout objective) from initial_dist.
ParamDist fit_variational(Method m, const CellSetup& setup, const Dataset& train,
                          std::vector<LossPoint>* trace = nullptr);
/// Monte Carlo predictive with scale.predictive_samples draws.
Prediction predict_dist(const ParamDist& q, const CellSetup& setup, const Matrix& eval);

/// Fits `m` on train and predicts at every eval row. Throws on failure.
Prediction fit_predict(Method m, const CellSetup& setup, const Dataset& train,
                       const Matrix& eval);
/// Several evaluation sets from one fit (e.g. a slice and a heatmap grid).
std::vector<Prediction> fit_predict_many(Method m, const CellSetup& setup, const Dataset& train,
                                         const std::vector<const Matrix*>& evals);

}  // namespace inbetween
