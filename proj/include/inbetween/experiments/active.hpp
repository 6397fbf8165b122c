#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "inbetween/core/dataset.hpp"
#include "inbetween/core/rng.hpp"

namespace inbetween {

/// Index of the largest value (first on ties). Throws on empty input.
std::size_t argmax_acquisition(std::span<const double> pool_var);

class ActiveLearningError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Active and pool index sets over a train split. active and pool always
/// partition the split; every acquisition moves exactly one index.
class ActiveLearningState {
 public:
  ActiveLearningState(std::size_t train_size, std::vector<std::size_t> initial);

  [[nodiscard]] const std::vector<std::size_t>& active() const noexcept { return active_; }
  [[nodiscard]] const std::vector<std::size_t>& pool() const noexcept { return pool_; }
  [[nodiscard]] const std::vector<std::size_t>& acquired() const noexcept { return acquired_; }
  [[nodiscard]] const std::vector<double>& rmse() const noexcept { return rmse_; }
  [[nodiscard]] std::size_t iteration() const noexcept { return acquired_.size(); }
  [[nodiscard]] std::size_t initial_size() const noexcept { return initial_size_; }

  /// Moves pool()[pool_position] into the active set.
  void acquire_at(std::size_t pool_position);
  void record_rmse(double rmse) { rmse_.push_back(rmse); }
  /// Re-checks the partition and growth invariants; throws ActiveLearningError.
  void check() const;

 private:
  std::size_t train_size_;
  std::size_t initial_size_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> acquired_;
  std::vector<double> rmse_;
};

/// Train/test split and the initial active set of one seed; shared by the
/// active and random arms so the comparison is paired.
struct ActiveSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  /// Positions into `train`.
  std::vector<std::size_t> initial;
};

ActiveSplit make_active_split(std::size_t n, double test_fraction, std::size_t initial,
                              std::uint64_t seed);

enum class Acquisition { kActive, kRandom };

/// Fits on the active rows and returns predictive mean at `test` and
/// variance at `pool`.
struct ModelOutputs {
  std::vector<double> test_mean;
  std::vector<double> pool_var;
};
using ActiveModelFn =
    std::function<ModelOutputs(const Dataset& active, const Matrix& test_x, const Matrix& pool_x)>;

double rmse(std::span<const double> pred, std::span<const double> truth);

/// Runs `acquisitions` rounds. RMSE is recorded after every fit, so the
/// history has acquisitions + 1 entries.
ActiveLearningState run_active_loop(const Dataset& train, const Dataset& test,
                                    const std::vector<std::size_t>& initial,
                                    std::size_t acquisitions, Acquisition mode,
                                    const ActiveModelFn& model, RngStream& rng);

}  // namespace inbetween
