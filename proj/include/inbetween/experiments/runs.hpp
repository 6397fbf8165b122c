#pragma once

// Experiment drivers. Each returns its numbers in memory and, when an output
// directory is set, writes `<outdir>/<experiment>/<method>_<depth>_<seed>.csv`
// tables plus a manifest.json. Failures of a single (method, depth, seed)
// cell are recorded and the run continues.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inbetween/analysis/bounds.hpp"
#include "inbetween/analysis/fuzz.hpp"
#include "inbetween/core/stats.hpp"
#include "inbetween/experiments/active.hpp"
#include "inbetween/experiments/config.hpp"
#include "inbetween/experiments/methods.hpp"

namespace inbetween {

struct ExperimentConfig {
  ScaleConfig scale = scale_config(Scale::kDesk);
  std::vector<std::size_t> depths{1};
  std::vector<Method> methods = all_methods();
  /// Empty: keep results in memory only.
  std::filesystem::path outdir;
  /// sigma_w = sqrt(2) at every depth instead of the per-depth table.
  bool sqrt2_prior = false;
  double dropout_p = 0.05;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Weight prior used for the two-cluster experiments at `depth`.
PriorConfig two_cluster_prior(const ExperimentConfig& cfg, std::size_t depth);

/// n evenly spaced values from lo to hi inclusive. For a symmetric range and
/// odd n the middle value is exactly 0.
std::vector<double> linspace(double lo, double hi, std::size_t n);
/// Rows (lambda, lambda).
Matrix diagonal_slice(std::span<const double> lambdas);

// ---------------------------------------------------------------- fig 2

struct Fig2Fit {
  Method method = Method::kMfvi;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  /// Closed-form bound check of the fitted network on [-1, 1].
  BoundReport bound;
  double fit_var_origin = 0.0;
  double fit_var_left = 0.0;
  double fit_var_right = 0.0;
  double target_var_origin = 0.0;
  /// Var(-1) + Var(1) for FFG; the chord value at 0 for MCDO.
  double bound_origin = 0.0;
  [[nodiscard]] bool underestimates() const { return fit_var_origin < target_var_origin; }
  [[nodiscard]] bool target_exceeds_bound() const { return target_var_origin > bound_origin; }
};

struct Fig2Result {
  std::vector<Fig2Fit> fits;
  nlohmann::json manifest;
};

/// Moment-matches one-hidden-layer FFG and MCDO networks to a GP posterior
/// fitted on 1D two-cluster data. Methods other than mfvi/mcdo are ignored.
Fig2Result run_fig2(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- fig 3

struct SliceSummary {
  double std_mid = 0.0;
  /// Mean std at the two cluster centres (lambda = -1, 1).
  double std_clusters = 0.0;
  /// Overconfidence ratio at the midpoint relative to the GP (1 for the GP).
  double gamma_mid = 0.0;
};

struct Fig3Cell {
  Method method = Method::kGp;
  std::size_t depth = 1;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  SliceSummary slice;
  nlohmann::json info;
};

struct Fig3Result {
  std::vector<Fig3Cell> cells;
  nlohmann::json manifest;
  [[nodiscard]] const Fig3Cell* find(Method m, std::size_t depth, std::uint64_t seed) const;
};

/// 2D two-cluster regression: diagonal slice and heatmap of predictive std.
Fig3Result run_fig3(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- fig 4

struct Fig4Cell {
  Method method = Method::kGp;
  std::size_t depth = 1;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  BoxStats gamma;
};

struct Fig4Result {
  std::vector<Fig4Cell> cells;
  nlohmann::json manifest;
};

/// Overconfidence ratios on 300 slice points for every depth; HMC only at
/// depths 1 and 2.
Fig4Result run_fig4(const ExperimentConfig& cfg);

// ------------------------------------------------------ random clusters

struct RandomClustersCell {
  Method method = Method::kGp;
  std::size_t depth = 1;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double gamma_mid = 0.0;
  /// Convexity check along the probe (one-hidden-layer MCDO only).
  std::optional<BoundReport> convexity;
};

struct RandomClustersResult {
  std::vector<RandomClustersCell> cells;
  nlohmann::json manifest;
};

/// Two clusters on the radius-sqrt(5) sphere, predictive along the segment
/// joining their centres. Uses sigma_w = sqrt(2) and noise 0.01.
RandomClustersResult run_random_clusters(const ExperimentConfig& cfg);

// ------------------------------------------------------ active learning

struct ActiveCell {
  Method method = Method::kGp;
  std::size_t depth = 1;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<double> rmse_active;
  std::vector<double> rmse_random;
  std::vector<std::size_t> acquired_active;
  std::vector<std::size_t> acquired_random;
  std::vector<std::size_t> initial;
};

struct ActiveSummaryRow {
  Method method = Method::kGp;
  std::size_t depth = 1;
  Acquisition mode = Acquisition::kActive;
  double mean_rmse = 0.0;
  double se_rmse = 0.0;
  std::size_t seeds = 0;
};

struct ActiveResult {
  std::vector<ActiveCell> cells;
  /// Final-iteration RMSE averaged over seeds.
  std::vector<ActiveSummaryRow> table;
  nlohmann::json manifest;
  [[nodiscard]] const ActiveSummaryRow* row(Method m, std::size_t depth, Acquisition a) const;
};

/// Active vs random acquisition on a normalised regression dataset (Naval).
/// HMC is not run. Uses sigma_w = sqrt(2), sigma_b = 1, noise 0.01.
ActiveResult run_active_learning(const ExperimentConfig& cfg, const Dataset& data);

// ------------------------------------------------- initialisation study

struct InitStudyCell {
  Method method = Method::kMfvi;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double gamma_mid_pre = 0.0;
  double gamma_mid_post = 0.0;
};

struct InitStudyResult {
  std::vector<InitStudyCell> cells;
  nlohmann::json manifest;
};

/// alpha per phase: 1.0 (pure moment matching), 0.9, ..., 0.0.
std::vector<double> anneal_schedule();

/// Two-hidden-layer FFG and MCDO: moment-match to the GP posterior, anneal
/// the loss towards the variational objective, then train on it alone.
InitStudyResult run_init_study(const ExperimentConfig& cfg);

// ------------------------------------------------------- theorem sweeps

struct TheoremSweepResult {
  std::vector<FuzzSummary> suites;
  nlohmann::json manifest;
  [[nodiscard]] bool passed() const;
};

TheoremSweepResult run_check_theorems(const ExperimentConfig& cfg, const FuzzConfig& fuzz);

}  // namespace inbetween
