#include "inbetween/gp/nngp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "inbetween/core/kernels.hpp"

namespace inbetween {
namespace {

constexpr std::array<double, 10> kSigmaWTable{4.0, 3.0, 2.25, 2.0, 2.0, 1.9, 1.75, 1.75, 1.7, 1.65};

double input_kernel(const NngpKernelConfig& cfg, std::span<const double> x,
                    std::span<const double> x2) {
  if (x.size() != cfg.input_dim || x2.size() != cfg.input_dim) {
    throw ShapeError(fmt::format("kernel inputs of size {} and {} for input dim {}", x.size(),
                                 x2.size(), cfg.input_dim));
  }
  return cfg.sigma_b * cfg.sigma_b + cfg.sigma_w * cfg.sigma_w *
                                         kernels::dot(x.data(), x2.data(), x.size()) /
                                         static_cast<double>(cfg.input_dim);
}

}  // namespace

void NngpKernelConfig::validate() const {
  if (depth == 0 || input_dim == 0 || !(sigma_w > 0.0) || !(sigma_b > 0.0)) {
    throw std::invalid_argument("NNGP kernel needs depth >= 1, input_dim >= 1, positive scales");
  }
}

double default_sigma_w(std::size_t depth) {
  if (depth == 0 || depth > kSigmaWTable.size()) {
    throw std::out_of_range(fmt::format("no default sigma_w for depth {}", depth));
  }
  return kSigmaWTable[depth - 1];
}

NngpKernelConfig default_kernel(std::size_t depth, std::size_t input_dim) {
  return {depth, default_sigma_w(depth), 1.0, input_dim};
}

double nngp_kernel(const NngpKernelConfig& cfg, std::span<const double> x,
                   std::span<const double> x2) {
  cfg.validate();
  double k11 = input_kernel(cfg, x, x);
  double k22 = input_kernel(cfg, x2, x2);
  double k12 = input_kernel(cfg, x, x2);
  const double sb2 = cfg.sigma_b * cfg.sigma_b;
  const double c = cfg.sigma_w * cfg.sigma_w / (2.0 * std::numbers::pi);
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    const double norm = std::sqrt(k11 * k22);
    const double cos_t = std::clamp(k12 / norm, -1.0, 1.0);
    const double theta = std::acos(cos_t);
    k12 = sb2 + c * norm * (std::sin(theta) + (std::numbers::pi - theta) * cos_t);
    k11 = sb2 + 0.5 * cfg.sigma_w * cfg.sigma_w * k11;
    k22 = sb2 + 0.5 * cfg.sigma_w * cfg.sigma_w * k22;
  }
  return k12;
}

double nngp_diag(const NngpKernelConfig& cfg, std::span<const double> x) {
  cfg.validate();
  double d = input_kernel(cfg, x, x);
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    d = cfg.sigma_b * cfg.sigma_b + 0.5 * cfg.sigma_w * cfg.sigma_w * d;
  }
  return d;
}

Matrix nngp_gram(const NngpKernelConfig& cfg, const Matrix& a, const Matrix& b) {
  Matrix k(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) k(i, j) = nngp_kernel(cfg, a.row(i), b.row(j));
  }
  return k;
}

Matrix nngp_gram(const NngpKernelConfig& cfg, const Matrix& a) {
  Matrix k(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    k(i, i) = nngp_diag(cfg, a.row(i));
    for (std::size_t j = 0; j < i; ++j) {
      k(i, j) = nngp_kernel(cfg, a.row(i), a.row(j));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

GPModel gp_fit(const NngpKernelConfig& cfg, const Dataset& data, double noise_std) {
  cfg.validate();
  data.validate();
  if (!(noise_std > 0.0)) throw std::invalid_argument("noise std must be positive");
  if (data.size() > 0 && data.dim() != cfg.input_dim) {
    throw ShapeError("dataset dimension does not match the kernel");
  }
  GPModel m{cfg, data.x, data.y, noise_std, {}, Matrix(data.size(), 1)};
  if (data.size() == 0) return m;
  Matrix k = nngp_gram(cfg, data.x);
  for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) += noise_std * noise_std;
  m.chol = Cholesky(k);
  m.alpha = m.chol.solve(data.y_column());
  return m;
}

std::vector<GaussianMoments> gp_predict(const GPModel& model, const Matrix& x) {
  std::vector<GaussianMoments> out(x.rows());
  for (std::size_t j = 0; j < x.rows(); ++j) out[j] = {0.0, nngp_diag(model.cfg, x.row(j))};
  if (model.y_train.empty()) return out;
  const Matrix ks = nngp_gram(model.cfg, model.x_train, x);  // N x M
  const Matrix v = model.chol.solve_lower(ks);
  const std::size_t n = ks.rows();
  for (std::size_t j = 0; j < x.rows(); ++j) {
    double mean = 0.0;
    double reduce = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += ks(i, j) * model.alpha[i];
      reduce += v(i, j) * v(i, j);
    }
    out[j].mean = mean;
    out[j].variance = std::max(0.0, out[j].variance - reduce);
  }
  return out;
}

Matrix sample_gp_prior(const NngpKernelConfig& cfg, const Matrix& x, std::size_t count,
                       RngStream& rng) {
  const Cholesky chol(nngp_gram(cfg, x));
  const std::size_t n = x.rows();
  Matrix out(count, n);
  std::vector<double> z(n);
  for (std::size_t c = 0; c < count; ++c) {
    for (double& v : z) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      out(c, i) = kernels::dot(chol.lower().row(i).data(), z.data(), i + 1);
    }
  }
  return out;
}

void write_predictions_csv(const Matrix& x, const std::vector<GaussianMoments>& pred,
                           const std::filesystem::path& path) {
  if (pred.size() != x.rows()) throw ShapeError("one prediction per input row expected");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  for (std::size_t d = 0; d < x.cols(); ++d) os << 'x' << d << ',';
  os << "mean,std\n";
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double v : x.row(r)) os << fmt::format("{:.17g},", v);
    os << fmt::format("{:.17g},{:.17g}\n", pred[r].mean, std::sqrt(pred[r].variance));
  }
}

nlohmann::json to_json(const NngpKernelConfig& cfg) {
  return {{"depth", cfg.depth},
          {"sigma_w", cfg.sigma_w},
          {"sigma_b", cfg.sigma_b},
          {"input_dim", cfg.input_dim}};
}

}  // namespace inbetween
