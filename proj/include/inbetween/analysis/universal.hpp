#pragma once

// Constructive two-hidden-layer networks whose predictive mean and variance
// approximate arbitrary targets g (continuous) and h (non-negative) on a 1D
// interval.
//
// Both sub-networks are exact piecewise-linear interpolants of their targets
// on `knots` evenly spaced knots:
//   s(x) = c0 + sum_k beta_k relu(x - x_k),
// so the first hidden layer needs one unit per knot and per sub-network.

#include <span>
#include <vector>

#include <json.hpp>

#include "inbetween/bnn/moments.hpp"

namespace inbetween {

enum class Family { kFfg, kMcdo };

struct UniversalBudget {
  /// Interpolation knots per sub-network (first hidden layer width per copy).
  std::size_t knots = 21;
  /// Dropout only: averaged copies L of each sub-network.
  std::size_t copies = 1024;
  /// Dropout only: second-layer units I carrying the mean.
  std::size_t mean_units = 1024;
  /// Dropout rate.
  double p = 0.05;
  /// Std of every parameter that should be deterministic (FFG only).
  double tiny_std = 1e-6;
  /// Offset keeping the mean sub-network strictly positive.
  double margin = 0.1;

  /// Knot intervals, copies and mean_units all scaled by `factor`.
  [[nodiscard]] UniversalBudget scaled(std::size_t factor) const;
};

/// Piecewise-linear interpolant in ReLU form.
struct ReluInterpolant {
  std::vector<double> knots;
  double intercept = 0.0;
  std::vector<double> slopes;  // beta_k

  [[nodiscard]] double operator()(double x) const;
};

/// Interpolates (grid, values) at `knots` evenly spaced knots spanning the
/// grid. Values between grid points use linear interpolation.
ReluInterpolant fit_relu_interpolant(std::span<const double> grid, std::span<const double> values,
                                     std::size_t knots);

/// Structured description of the constructed network. The dropout network
/// has copies * (mean + variance knots) first-layer units and mean_units + 2
/// second-layer units, so the dense parameters are only built on request.
struct UniversalNet {
  Family family = Family::kFfg;
  UniversalBudget budget;
  ReluInterpolant mean_net;
  ReluInterpolant var_net;
  /// Output bias min(g) - margin.
  double output_bias = 0.0;
};

/// Builds the network. Throws std::invalid_argument when h < 0 somewhere or the
/// grid is not strictly increasing.
UniversalNet construct_universal_2hl(std::span<const double> grid, std::span<const double> g,
                                     std::span<const double> h, Family family,
                                     const UniversalBudget& budget);

/// Dense parameters of the network. Throws std::length_error above
/// `max_params` parameters.
ParamDist materialize(const UniversalNet& net, std::size_t max_params = 20'000'000);

/// Monte Carlo mean/variance at x. For dropout this samples the same
/// distribution as the generic sampler on materialize(net) but only draws the
/// sufficient statistics: per-knot kept-copy counts and the kept mean-unit
/// count (binomial), so wide budgets stay cheap.
PredictiveMoments universal_moments(const UniversalNet& net, std::span<const double> x,
                                    std::size_t samples, const RngStream& rng);

struct UniversalFit {
  double mean_sup_error = 0.0;
  double var_sup_error = 0.0;
  /// Largest 4-SE band on the estimates above.
  double mean_slack = 0.0;
  double var_slack = 0.0;
};

UniversalFit universal_fit_error(const PredictiveMoments& m, std::span<const double> g,
                                 std::span<const double> h);

nlohmann::json to_json(const UniversalBudget& b);
nlohmann::json to_json(const UniversalFit& f);

}  // namespace inbetween
