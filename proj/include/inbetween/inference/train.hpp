#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "inbetween/inference/objectives.hpp"

namespace inbetween {

struct ValueAndGrad {
  double value = 0.0;
  std::vector<Matrix> grads;
};

/// Loss and gradient at `blocks`. The stream is copied, so repeated calls
/// with the same stream see the same Monte Carlo noise.
ValueAndGrad value_and_grad(const LossFn& loss, const std::vector<Matrix>& blocks,
                            const RngStream& rng);

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t t = 0;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected ADAM update in place.
void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& cfg);

struct TrainConfig {
  std::size_t iterations = 1000;
  AdamConfig adam;
  std::uint64_t seed = 0;
  /// Loss is recorded at iteration 0, every log_every iterations, and at the end.
  std::size_t log_every = 100;
};

struct LossPoint {
  std::size_t iteration = 0;
  double loss = 0.0;
};

struct TrainResult {
  std::vector<Matrix> blocks;
  std::vector<LossPoint> trace;
};

/// Divergence: non-finite loss or |loss| above this aborts training.
inline constexpr double kDivergenceThreshold = 1e12;

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t iteration, double loss, std::vector<LossPoint> trace);
  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }
  [[nodiscard]] const std::vector<LossPoint>& trace() const noexcept { return trace_; }

 private:
  std::size_t iteration_;
  std::vector<LossPoint> trace_;
};

/// Full-batch ADAM. Iteration i draws noise from RngStream(seed, 0).split(i).
TrainResult train(const LossFn& loss, std::vector<Matrix> init, const TrainConfig& cfg);

/// Trains a distribution on an objective and returns the fitted distribution.
ParamDist train_dist(const ParamDist& init, const ObjectiveSpec& objective,
                     const TrainConfig& cfg, std::vector<LossPoint>* trace = nullptr);

/// CSV with header "iteration,loss".
void write_trace_csv(const std::vector<LossPoint>& trace, const std::filesystem::path& path);
nlohmann::json to_json(const TrainConfig& cfg);

}  // namespace inbetween
