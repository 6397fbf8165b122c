#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "inbetween/core/matrix.hpp"
#include "inbetween/core/rng.hpp"

namespace inbetween {

/// Fully connected ReLU network shape. Layer l maps dims()[l] -> dims()[l+1].
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;
  std::size_t output_dim = 1;

  [[nodiscard]] std::size_t depth() const noexcept { return hidden.size(); }
  [[nodiscard]] std::size_t num_layers() const noexcept { return hidden.size() + 1; }
  [[nodiscard]] std::vector<std::size_t> dims() const;
  /// Throws std::invalid_argument unless depth >= 1 and every dim is positive.
  void validate() const;

  static NetworkSpec uniform(std::size_t input_dim, std::size_t depth, std::size_t width,
                             std::size_t output_dim = 1);

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// y = x W + b with W stored in x out (rows index inputs).
struct DenseLayer {
  Matrix w;
  Matrix b;  // 1 x out
};

/// A concrete parameter draw.
struct NetworkParams {
  NetworkSpec spec;
  std::vector<DenseLayer> layers;
};

struct GaussianLayer {
  Matrix w_mean;
  Matrix w_log_std;
  Matrix b_mean;
  Matrix b_log_std;
};

/// Fully factorised Gaussian over all weights and biases.
struct FFGParams {
  NetworkSpec spec;
  std::vector<GaussianLayer> layers;
};

/// Deterministic weights with Bernoulli(1 - p) keep-masks on the inputs of
/// every layer after the first, and on the first layer iff drop_inputs.
/// No rescaling of kept units.
struct MCDOParams {
  NetworkSpec spec;
  std::vector<DenseLayer> layers;
  double p = 0.05;
  bool drop_inputs = false;
};

using ParamDist = std::variant<FFGParams, MCDOParams>;

/// Weight prior N(0, sigma_w^2 / N_in), bias prior N(0, sigma_b^2).
struct PriorConfig {
  double sigma_w = 1.0;
  double sigma_b = 1.0;

  [[nodiscard]] double weight_std(std::size_t fan_in) const;
};

enum class InitMethod { kMfviDefault, kMcdoDefault, kPrior };

/// Standard deviations below this are treated as "deterministic" by callers
/// that need a finite log-std.
inline constexpr double kTinyStd = 1e-30;

void validate(const FFGParams& q);
void validate(const MCDOParams& q);
void validate(const NetworkParams& theta);

/// Weight means ~ N(0, variance 1/sqrt(2 n_out)), biases 0, all stds 1e-5.
FFGParams init_mfvi(const NetworkSpec& spec, RngStream& rng);
/// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
MCDOParams init_mcdo(const NetworkSpec& spec, double p, bool drop_inputs, RngStream& rng);
/// Zero means, prior standard deviations.
FFGParams prior_ffg(const NetworkSpec& spec, const PriorConfig& prior);
/// Dispatch on method. `p` and `drop_inputs` only matter for kMcdoDefault.
ParamDist init_params(const NetworkSpec& spec, InitMethod method, const PriorConfig& prior,
                      RngStream& rng, double p = 0.05, bool drop_inputs = false);

/// All-zero FFG with every std equal to `std` (log-std = log(std)).
FFGParams zero_ffg(const NetworkSpec& spec, double std);
/// All-zero deterministic parameters.
NetworkParams zero_params(const NetworkSpec& spec);

NetworkParams ffg_means(const FFGParams& q);
NetworkParams sample_params(const FFGParams& q, RngStream& rng);
NetworkParams sample_params(const MCDOParams& q, RngStream& rng);
NetworkParams sample_params(const ParamDist& q, RngStream& rng);
const NetworkSpec& spec_of(const ParamDist& q);

/// Output rows for each input row; ReLU between layers, affine readout.
Matrix forward(const NetworkParams& theta, const Matrix& x);

/// In-place y += 1 x n row vector b on every row.
void add_row_bias(Matrix& y, const Matrix& b);

}  // namespace inbetween
