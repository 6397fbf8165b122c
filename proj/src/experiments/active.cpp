#include "inbetween/experiments/active.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace inbetween {

std::size_t argmax_acquisition(std::span<const double> pool_var) {
  if (pool_var.empty()) throw std::invalid_argument("acquisition from an empty pool");
  std::size_t best = 0;
  for (std::size_t i = 1; i < pool_var.size(); ++i) {
    if (pool_var[i] > pool_var[best]) best = i;
  }
  return best;
}

ActiveLearningState::ActiveLearningState(std::size_t train_size, std::vector<std::size_t> initial)
    : train_size_(train_size), initial_size_(initial.size()), active_(std::move(initial)) {
  std::vector<char> used(train_size_, 0);
  for (std::size_t i : active_) {
    if (i >= train_size_) throw ActiveLearningError("initial index outside the train split");
    if (used[i]) throw ActiveLearningError("duplicate index in the initial active set");
    used[i] = 1;
  }
  for (std::size_t i = 0; i < train_size_; ++i) {
    if (!used[i]) pool_.push_back(i);
  }
}

void ActiveLearningState::acquire_at(std::size_t pool_position) {
  if (pool_position >= pool_.size()) {
    throw ActiveLearningError(
        fmt::format("pool position {} with pool size {}", pool_position, pool_.size()));
  }
  const std::size_t idx = pool_[pool_position];
  pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(pool_position));
  active_.push_back(idx);
  acquired_.push_back(idx);
}

void ActiveLearningState::check() const {
  if (active_.size() != initial_size_ + acquired_.size()) {
    throw ActiveLearningError("active set did not grow by one per acquisition");
  }
  if (active_.size() + pool_.size() != train_size_) {
    throw ActiveLearningError("active and pool do not cover the train split");
  }
  std::vector<char> seen(train_size_, 0);
  for (const auto* set : {&active_, &pool_}) {
    for (std::size_t i : *set) {
      if (i >= train_size_ || seen[i]) throw ActiveLearningError("active/pool overlap");
      seen[i] = 1;
    }
  }
  std::vector<std::size_t> acq = acquired_;
  std::sort(acq.begin(), acq.end());
  if (std::adjacent_find(acq.begin(), acq.end()) != acq.end()) {
    throw ActiveLearningError("index acquired twice");
  }
}

ActiveSplit make_active_split(std::size_t n, double test_fraction, std::size_t initial,
                              std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, 1);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_test = static_cast<std::size_t>(std::round(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n - n_test <= initial) {
    throw std::invalid_argument(fmt::format("{} rows cannot hold the split", n));
  }
  ActiveSplit s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  // The train split is already a random permutation, so its first positions
  // are a uniform initial set.
  s.initial.resize(initial);
  std::iota(s.initial.begin(), s.initial.end(), 0);
  return s;
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw std::invalid_argument("rmse needs equal non-empty inputs");
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

ActiveLearningState run_active_loop(const Dataset& train, const Dataset& test,
                                    const std::vector<std::size_t>& initial,
                                    std::size_t acquisitions, Acquisition mode,
                                    const ActiveModelFn& model, RngStream& rng) {
  ActiveLearningState state(train.size(), initial);
  if (acquisitions > state.pool().size()) {
    throw std::invalid_argument("more acquisitions than pool points");
  }
  for (std::size_t it = 0; it <= acquisitions; ++it) {
    const Dataset active = train.subset(state.active());
    const bool last = it == acquisitions;
    // The final fit only needs test predictions.
    const Dataset pool = last || mode == Acquisition::kRandom
                             ? Dataset{Matrix(0, train.dim()), {}, {}}
                             : train.subset(state.pool());
    const ModelOutputs out = model(active, test.x, pool.x);
    state.record_rmse(rmse(out.test_mean, test.y));
    if (last) break;
    std::size_t pos = 0;
    if (mode == Acquisition::kActive) {
      if (out.pool_var.size() != state.pool().size()) {
        throw std::logic_error("model returned the wrong number of pool variances");
      }
      pos = argmax_acquisition(out.pool_var);
    } else {
      pos = rng.below(state.pool().size());
    }
    state.acquire_at(pos);
    state.check();
  }
  return state;
}

}  // namespace inbetween
