#pragma once

// Executable checks of the variance bounds for one- and multi-layer ReLU
// networks under factorised Gaussian and dropout distributions.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "inbetween/bnn/moments.hpp"

namespace inbetween {

/// Line x(lambda) = direction * lambda + offset, sampled at `points`
/// evenly spaced lambdas in [lambda_lo, lambda_hi] (plus lambda = 0 when the
/// range straddles it).
struct LineProbe {
  std::vector<double> direction;
  std::vector<double> offset;
  double lambda_lo = -1.0;
  double lambda_hi = 1.0;
  std::size_t points = 41;

  [[nodiscard]] std::size_t dim() const noexcept { return direction.size(); }
  /// gamma_d * c_d == 0 for every coordinate.
  [[nodiscard]] bool coordinatewise_orthogonal(double tol = 0.0) const;
  [[nodiscard]] std::vector<double> lambdas() const;
  [[nodiscard]] std::vector<double> at(double lambda) const;
  /// Rows x(lambda) for every lambda in lambdas().
  [[nodiscard]] Matrix points_matrix() const;
  void validate() const;
};

class InvalidProbe : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BoundReport {
  std::string check;
  std::string probe;
  /// Largest (lhs - rhs) seen; the bound holds when max_violation <= tolerance.
  double max_violation = 0.0;
  double tolerance = 0.0;
  /// Inputs realising max_violation, in the order the check describes.
  std::vector<std::vector<double>> witness;
  std::size_t comparisons = 0;

  [[nodiscard]] bool holds() const noexcept { return max_violation <= tolerance; }
};

nlohmann::json to_json(const BoundReport& r);
nlohmann::json to_json(const LineProbe& p);

/// Var(lambda*) - Var(lambda1) - Var(lambda2) over every grid triple with
/// lambda1 <= 0 <= lambda2 and |lambda*| <= min(|lambda1|, |lambda2|), using
/// closed-form moments of a one-hidden-layer FFG network (output k).
BoundReport check_thm1(const FFGParams& q, const LineProbe& probe, double tol = 1e-9,
                       std::size_t k = 0);

/// For an axis-aligned box [-h, h] centred at the origin: Var at `per_dim`^D
/// interior grid points minus the sum of Var over the 2^D vertices.
BoundReport check_hypercube(const FFGParams& q, std::span<const double> half_widths,
                            std::size_t per_dim = 7, double tol = 1e-9, std::size_t k = 0);

/// Discrete convexity of Var along the segment x_a -> x_b for a one-hidden-layer
/// MCDO network with inputs kept: for grid t_i < t_k < t_j, Var(t_k) minus the
/// chord value. Also folds in Var(t_k) - max(Var(x_a), Var(x_b)).
BoundReport check_convexity_mcdo(const MCDOParams& q, std::span<const double> x_a,
                                 std::span<const double> x_b, std::size_t points = 21,
                                 double tol = 1e-9, std::size_t k = 0);

/// Result of the Monte Carlo checks: the bound is compared against
/// `slack_se` standard errors of the estimated difference.
struct McBoundReport {
  BoundReport report;
  double lhs = 0.0;
  double rhs = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
};
nlohmann::json to_json(const McBoundReport& r);

/// Nonnegative weights w with S^T w = 0 and sum w = 1, or nullopt when the
/// origin is not in the convex hull of the rows of S (residual >= 1e-8).
std::optional<std::vector<double>> origin_hull_weights(const Matrix& s);

class NotInHull : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Var[f(0)] <= max_s Var[f(s)] for dropout with dropped inputs, one hidden
/// layer. Throws NotInHull if 0 is not in the hull of the rows of s.
McBoundReport check_thm5_convex_hull(const MCDOParams& q, const Matrix& s, std::size_t samples,
                                     const RngStream& rng, double slack_se = 4.0);

/// |E f(x) - E f(x')| <= 2 eps sqrt(2 / p) with eps = max(std f(x), std f(x')),
/// for dropout with dropped inputs at any depth and one input dimension.
McBoundReport check_deep_dropout_prop(const MCDOParams& q, double x, double x2,
                                      std::size_t samples, const RngStream& rng,
                                      double slack_se = 4.0);

/// 2 eps sqrt(2 / p).
double deep_dropout_gap_bound(double eps, double p);

}  // namespace inbetween
