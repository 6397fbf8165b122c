#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "inbetween/bnn/network.hpp"
#include "inbetween/core/cholesky.hpp"
#include "inbetween/core/dataset.hpp"
#include "inbetween/core/gaussian.hpp"
#include "inbetween/core/rng.hpp"

namespace inbetween {

/// Infinite-width limit of a ReLU network with `depth` hidden layers and
/// priors W ~ N(0, sigma_w^2 / N_in), b ~ N(0, sigma_b^2) at every layer,
/// including the readout.
struct NngpKernelConfig {
  std::size_t depth = 1;
  double sigma_w = 1.0;
  double sigma_b = 1.0;
  std::size_t input_dim = 1;

  void validate() const;
  [[nodiscard]] PriorConfig prior() const { return {sigma_w, sigma_b}; }
};

/// sigma_w used at each depth 1..10 for the two-cluster experiments; sigma_b = 1.
double default_sigma_w(std::size_t depth);
NngpKernelConfig default_kernel(std::size_t depth, std::size_t input_dim);

double nngp_kernel(const NngpKernelConfig& cfg, std::span<const double> x,
                   std::span<const double> x2);
/// K(x, x) via the diagonal recursion d <- sigma_b^2 + sigma_w^2 d / 2.
double nngp_diag(const NngpKernelConfig& cfg, std::span<const double> x);
/// K(a_i, b_j) as a.rows() x b.rows().
Matrix nngp_gram(const NngpKernelConfig& cfg, const Matrix& a, const Matrix& b);
Matrix nngp_gram(const NngpKernelConfig& cfg, const Matrix& a);

/// Exact GP regression with fixed hyperparameters.
struct GPModel {
  NngpKernelConfig cfg;
  Matrix x_train;
  std::vector<double> y_train;
  double noise_std = 0.1;
  /// Factor of K + noise_std^2 I.
  Cholesky chol;
  /// (K + noise_std^2 I)^{-1} y as an N x 1 column.
  Matrix alpha;
};

GPModel gp_fit(const NngpKernelConfig& cfg, const Dataset& data, double noise_std);
/// Latent predictive moments of f at each row of x.
std::vector<GaussianMoments> gp_predict(const GPModel& model, const Matrix& x);

/// `count` joint prior draws of f at the rows of x (count x N).
Matrix sample_gp_prior(const NngpKernelConfig& cfg, const Matrix& x, std::size_t count,
                       RngStream& rng);

/// CSV with columns x0..x{D-1},mean,std.
void write_predictions_csv(const Matrix& x, const std::vector<GaussianMoments>& pred,
                           const std::filesystem::path& path);
nlohmann::json to_json(const NngpKernelConfig& cfg);

}  // namespace inbetween
