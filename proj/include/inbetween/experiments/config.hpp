#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace inbetween {

enum class Scale { kSmoke, kDesk, kPaper };

std::string_view scale_name(Scale s);
/// Throws std::invalid_argument on unknown names.
Scale parse_scale(std::string_view name);

/// Every budget an experiment reads. The full scale runs the long reference
/// protocols; smoke divides its iteration counts by 100 and widths by 2.
struct ScaleConfig {
  Scale scale = Scale::kDesk;
  std::size_t width = 50;
  std::vector<std::uint64_t> seeds{0};

  // Moment matching to a fixed target (1D fit).
  std::size_t moment_iterations = 10000;
  std::size_t moment_samples = 128;
  std::size_t moment_grid = 40;

  // Variational training on the synthetic datasets.
  std::size_t train_iterations = 5000;
  std::size_t train_samples = 32;
  std::size_t predictive_samples = 500;
  double learning_rate = 1e-3;

  // HMC reference (one hidden layer / two hidden layers).
  std::size_t hmc_samples = 20000;
  std::size_t hmc_warmup = 2000;
  std::size_t hmc_samples_deep = 20000;
  std::size_t hmc_warmup_deep = 2000;
  std::size_t hmc_leapfrog = 20;
  /// Stored samples are capped near this count by thinning.
  std::size_t hmc_keep = 2000;

  // Active learning.
  std::size_t al_subsample = 2000;  ///< 0 keeps every row
  std::size_t al_seeds = 5;
  std::size_t al_iterations = 2000;
  std::size_t al_acquisitions = 50;
  std::size_t al_initial = 5;
  double al_test_fraction = 0.1;

  // Loss-interpolation initialisation study.
  std::size_t init_moment_iterations = 5000;
  std::size_t init_anneal_iterations = 1000;  ///< per alpha step
  std::size_t init_final_iterations = 10000;

  // Grids.
  std::size_t slice_points = 121;
  std::size_t box_points = 300;
  std::size_t heatmap_side = 100;
};

ScaleConfig scale_config(Scale s);
nlohmann::json to_json(const ScaleConfig& cfg);

enum class Method { kGp, kMfvi, kMcdo, kHmc };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
/// Parses a comma-separated list such as "gp,mfvi".
std::vector<Method> parse_methods(std::string_view list);
std::vector<Method> all_methods();

}  // namespace inbetween
