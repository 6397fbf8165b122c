#include "inbetween/bnn/network.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "inbetween/core/kernels.hpp"

namespace inbetween {
namespace {

void check_layer_shapes(const NetworkSpec& spec, std::size_t l, const Matrix& w, const Matrix& b,
                        const char* what) {
  const auto dims = spec.dims();
  if (w.rows() != dims[l] || w.cols() != dims[l + 1] || b.rows() != 1 ||
      b.cols() != dims[l + 1]) {
    throw ShapeError(fmt::format("{} layer {}: expected W {}x{}, b 1x{}; got W {}, b {}", what,
                                 l, dims[l], dims[l + 1], dims[l + 1], w.shape_string(),
                                 b.shape_string()));
  }
}

void check_layer_count(const NetworkSpec& spec, std::size_t n, const char* what) {
  spec.validate();
  if (n != spec.num_layers()) {
    throw ShapeError(
        fmt::format("{}: {} layers for a spec with {}", what, n, spec.num_layers()));
  }
}

void fill_normal(Matrix& m, double mean, double sd, RngStream& rng) {
  for (double& v : m.flat()) v = mean + sd * rng.normal();
}

void fill_uniform(Matrix& m, double bound, RngStream& rng) {
  for (double& v : m.flat()) v = rng.uniform(-bound, bound);
}

}  // namespace

std::vector<std::size_t> NetworkSpec::dims() const {
  std::vector<std::size_t> d;
  d.reserve(hidden.size() + 2);
  d.push_back(input_dim);
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(output_dim);
  return d;
}

void NetworkSpec::validate() const {
  if (hidden.empty()) throw std::invalid_argument("network needs at least one hidden layer");
  for (std::size_t d : dims()) {
    if (d == 0) throw std::invalid_argument("network dimensions must be positive");
  }
}

NetworkSpec NetworkSpec::uniform(std::size_t input_dim, std::size_t depth, std::size_t width,
                                 std::size_t output_dim) {
  NetworkSpec s{input_dim, std::vector<std::size_t>(depth, width), output_dim};
  s.validate();
  return s;
}

double PriorConfig::weight_std(std::size_t fan_in) const {
  if (!(sigma_w > 0.0) || !(sigma_b > 0.0) || fan_in == 0) {
    throw std::invalid_argument("prior scales must be positive");
  }
  return sigma_w / std::sqrt(static_cast<double>(fan_in));
}

void validate(const FFGParams& q) {
  check_layer_count(q.spec, q.layers.size(), "FFGParams");
  for (std::size_t l = 0; l < q.layers.size(); ++l) {
    const auto& g = q.layers[l];
    check_layer_shapes(q.spec, l, g.w_mean, g.b_mean, "FFGParams");
    require_same_shape(g.w_mean, g.w_log_std, "FFGParams weight log-std");
    require_same_shape(g.b_mean, g.b_log_std, "FFGParams bias log-std");
  }
}

void validate(const MCDOParams& q) {
  check_layer_count(q.spec, q.layers.size(), "MCDOParams");
  for (std::size_t l = 0; l < q.layers.size(); ++l) {
    check_layer_shapes(q.spec, l, q.layers[l].w, q.layers[l].b, "MCDOParams");
  }
  if (!(q.p > 0.0 && q.p < 1.0)) {
    throw std::invalid_argument(fmt::format("dropout rate {} outside (0, 1)", q.p));
  }
}

void validate(const NetworkParams& theta) {
  check_layer_count(theta.spec, theta.layers.size(), "NetworkParams");
  for (std::size_t l = 0; l < theta.layers.size(); ++l) {
    check_layer_shapes(theta.spec, l, theta.layers[l].w, theta.layers[l].b, "NetworkParams");
  }
}

FFGParams zero_ffg(const NetworkSpec& spec, double std) {
  spec.validate();
  const auto dims = spec.dims();
  const double log_std = std::log(std);
  FFGParams q{spec, {}};
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    q.layers.push_back({Matrix(dims[l], dims[l + 1]), Matrix(dims[l], dims[l + 1], log_std),
                        Matrix(1, dims[l + 1]), Matrix(1, dims[l + 1], log_std)});
  }
  return q;
}

NetworkParams zero_params(const NetworkSpec& spec) {
  spec.validate();
  const auto dims = spec.dims();
  NetworkParams theta{spec, {}};
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    theta.layers.push_back({Matrix(dims[l], dims[l + 1]), Matrix(1, dims[l + 1])});
  }
  return theta;
}

FFGParams init_mfvi(const NetworkSpec& spec, RngStream& rng) {
  FFGParams q = zero_ffg(spec, 1e-5);
  for (auto& g : q.layers) {
    const double variance = 1.0 / std::sqrt(2.0 * static_cast<double>(g.w_mean.cols()));
    fill_normal(g.w_mean, 0.0, std::sqrt(variance), rng);
  }
  return q;
}

MCDOParams init_mcdo(const NetworkSpec& spec, double p, bool drop_inputs, RngStream& rng) {
  NetworkParams theta = zero_params(spec);
  for (auto& layer : theta.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.w.rows()));
    fill_uniform(layer.w, bound, rng);
    fill_uniform(layer.b, bound, rng);
  }
  MCDOParams q{spec, std::move(theta.layers), p, drop_inputs};
  validate(q);
  return q;
}

FFGParams prior_ffg(const NetworkSpec& spec, const PriorConfig& prior) {
  FFGParams q = zero_ffg(spec, 1.0);
  for (auto& g : q.layers) {
    g.w_log_std.fill(std::log(prior.weight_std(g.w_mean.rows())));
    g.b_log_std.fill(std::log(prior.sigma_b));
  }
  return q;
}

ParamDist init_params(const NetworkSpec& spec, InitMethod method, const PriorConfig& prior,
                      RngStream& rng, double p, bool drop_inputs) {
  switch (method) {
    case InitMethod::kMfviDefault:
      return init_mfvi(spec, rng);
    case InitMethod::kMcdoDefault:
      return init_mcdo(spec, p, drop_inputs, rng);
    case InitMethod::kPrior:
      return prior_ffg(spec, prior);
  }
  throw std::invalid_argument("unknown init method");
}

NetworkParams ffg_means(const FFGParams& q) {
  NetworkParams theta{q.spec, {}};
  for (const auto& g : q.layers) theta.layers.push_back({g.w_mean, g.b_mean});
  return theta;
}

NetworkParams sample_params(const FFGParams& q, RngStream& rng) {
  NetworkParams theta = ffg_means(q);
  for (std::size_t l = 0; l < q.layers.size(); ++l) {
    const auto& g = q.layers[l];
    auto& out = theta.layers[l];
    for (std::size_t i = 0; i < out.w.size(); ++i) {
      out.w[i] += std::exp(g.w_log_std[i]) * rng.normal();
    }
    for (std::size_t i = 0; i < out.b.size(); ++i) {
      out.b[i] += std::exp(g.b_log_std[i]) * rng.normal();
    }
  }
  return theta;
}

NetworkParams sample_params(const MCDOParams& q, RngStream& rng) {
  NetworkParams theta{q.spec, q.layers};
  const double keep = 1.0 - q.p;
  for (std::size_t l = 0; l < theta.layers.size(); ++l) {
    if (l == 0 && !q.drop_inputs) continue;
    Matrix& w = theta.layers[l].w;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      if (!rng.bernoulli(keep)) {
        for (double& v : w.row(r)) v = 0.0;
      }
    }
  }
  return theta;
}

NetworkParams sample_params(const ParamDist& q, RngStream& rng) {
  return std::visit([&](const auto& d) { return sample_params(d, rng); }, q);
}

const NetworkSpec& spec_of(const ParamDist& q) {
  return std::visit([](const auto& d) -> const NetworkSpec& { return d.spec; }, q);
}

void add_row_bias(Matrix& y, const Matrix& b) {
  if (b.rows() != 1 || b.cols() != y.cols()) {
    throw ShapeError(fmt::format("bias {} does not broadcast onto {}", b.shape_string(),
                                 y.shape_string()));
  }
  for (std::size_t r = 0; r < y.rows(); ++r) kernels::axpy(1.0, b.data(), y.row(r).data(), y.cols());
}

Matrix forward(const NetworkParams& theta, const Matrix& x) {
  validate(theta);
  if (x.cols() != theta.spec.input_dim) {
    throw ShapeError(fmt::format("forward: input {} for input dim {}", x.shape_string(),
                                 theta.spec.input_dim));
  }
  const auto& relu = kernels::active().relu;
  Matrix h = x;
  for (std::size_t l = 0; l < theta.layers.size(); ++l) {
    Matrix z = matmul(h, theta.layers[l].w);
    add_row_bias(z, theta.layers[l].b);
    if (l + 1 < theta.layers.size()) relu(z.data(), z.data(), z.size());
    h = std::move(z);
  }
  return h;
}

}  // namespace inbetween
