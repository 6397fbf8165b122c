#pragma once

#include <functional>
#include <span>
#include <vector>

#include "inbetween/bnn/network.hpp"
#include "inbetween/core/dataset.hpp"
#include "inbetween/inference/autodiff.hpp"

namespace inbetween {

/// Homoskedastic Gaussian observation noise with fixed standard deviation.
struct Likelihood {
  double noise_std = 0.1;

  [[nodiscard]] double log_prob(double y, double f) const;
};

// Trainable state is a flat list of matrices ("blocks"). FFG layer l
// contributes [w_mean, w_log_std, b_mean, b_log_std]; MCDO layer l
// contributes [w, b]. Dropout rate and flags are structural, not trained.
std::vector<Matrix> param_blocks(const ParamDist& q);
ParamDist with_blocks(const ParamDist& structure, std::vector<Matrix> blocks);
std::size_t block_count(const ParamDist& q);

namespace graph {

/// f(x) for `samples` joint draws, stacked as (samples * N) x K with row
/// s * N + n. FFG layers use local reparameterisation; MCDO draws one mask
/// per sample shared across the batch.
ad::Var sample_outputs(ad::Tape& tape, const ParamDist& structure,
                       std::span<const ad::Var> blocks, const Matrix& x, std::size_t samples,
                       RngStream& rng);

/// Per-point mean and unbiased variance (each 1 x N) of a stacked single
/// output column.
struct PointMoments {
  ad::Var mean;
  ad::Var var;
};
PointMoments point_moments(ad::Var stacked, std::size_t samples, std::size_t points);

ad::Var gaussian_kl(ad::Tape& tape, const NetworkSpec& spec, std::span<const ad::Var> blocks,
                    const PriorConfig& prior);
/// Expected negative log-likelihood: mean over samples, sum over points.
ad::Var gaussian_nll(ad::Tape& tape, ad::Var stacked, std::span<const double> y,
                     std::size_t samples, const Likelihood& lik);
/// sum_l (1 - p) / (2 s_l^2) |W_l|^2 + 1 / (2 sigma_b^2) |b_l|^2 with
/// s_l the prior weight std of layer l.
ad::Var mcdo_penalty(ad::Tape& tape, const MCDOParams& structure,
                     std::span<const ad::Var> blocks, const PriorConfig& prior);

}  // namespace graph

/// Loss to minimise, evaluated on a tape from trainable blocks.
using LossFn = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>, RngStream&)>;

enum class ObjectiveKind { kElbo, kMcdo, kMomentMatch, kInterpolated };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kElbo;
  Dataset data;
  Likelihood lik;
  PriorConfig prior;
  std::size_t mc_samples = 32;
  // Moment matching: grid inputs with target mean and variance of f.
  Matrix grid;
  std::vector<double> target_mean;
  std::vector<double> target_var;
  std::size_t moment_samples = 128;
  /// Weight of the moment-matching term in kInterpolated.
  double alpha = 1.0;
};

/// Builds the minimisation target. kElbo is the negative ELBO (FFG only),
/// kMcdo the dropout objective (MCDO only), kInterpolated is
/// alpha * moment-match + (1 - alpha) * the family's variational loss.
LossFn make_loss(const ParamDist& structure, ObjectiveSpec spec);

// Plain-value evaluations.

/// KL(q || prior) in closed form.
double gaussian_kl(const FFGParams& q, const PriorConfig& prior);
/// Monte Carlo ELBO: expected log-likelihood minus exact KL.
double elbo(const FFGParams& q, const Dataset& data, const Likelihood& lik,
            const PriorConfig& prior, std::size_t samples, RngStream& rng);
/// Mean negative log-likelihood over masks plus the l2 penalty.
double mcdo_objective(const MCDOParams& q, const Dataset& data, const Likelihood& lik,
                      const PriorConfig& prior, std::size_t samples, RngStream& rng);
/// |E f(X) - mean|^2 + |Var f(X) - var|^2 with Monte Carlo moments.
double moment_match_loss(const ParamDist& q, const Matrix& grid,
                         std::span<const double> target_mean,
                         std::span<const double> target_var, std::size_t samples,
                         RngStream& rng);
double interpolated_loss(double l1, double l2, double alpha);

}  // namespace inbetween
