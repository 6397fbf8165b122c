#include "inbetween/inference/hmc.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "inbetween/core/kernels.hpp"
#include "inbetween/core/stats.hpp"

namespace inbetween {
namespace {

void validate_config(const HmcConfig& cfg) {
  if (!(cfg.step_size > 0.0) || cfg.leapfrog_steps == 0 || !(cfg.mass > 0.0) || cfg.thin == 0 ||
      cfg.adapt_window == 0 || !(cfg.jitter >= 0.0 && cfg.jitter < 1.0)) {
    throw std::invalid_argument("invalid HMC configuration");
  }
}

}  // namespace

HmcChain hmc_sample(const LogDensityFn& log_density, std::vector<double> init,
                    const HmcConfig& cfg, RngStream& rng) {
  validate_config(cfg);
  const std::size_t d = init.size();
  std::vector<double> q = std::move(init);
  std::vector<double> grad(d);
  double logp = log_density(q, grad);
  if (!std::isfinite(logp)) throw HmcError("initial state has non-finite log density");

  std::vector<double> q_new(d);
  std::vector<double> g_new(d);
  std::vector<double> p(d);
  HmcChain chain;
  double eps = cfg.step_size;
  std::size_t window_accepts = 0;
  std::size_t window_count = 0;
  // Largest step whose window accepted at least 60%; a doubling in the final
  // window is never sampled with unless it was validated.
  double validated = 0.0;
  std::size_t accepted = 0;
  const std::size_t total = cfg.warmup + cfg.samples * cfg.thin;
  const double inv_mass = 1.0 / cfg.mass;
  const double sd_p = std::sqrt(cfg.mass);

  for (std::size_t it = 0; it < total; ++it) {
    const double h = eps * rng.uniform(1.0 - cfg.jitter, 1.0 + cfg.jitter);
    double kinetic0 = 0.0;
    for (double& pi : p) {
      pi = sd_p * rng.normal();
      kinetic0 += 0.5 * pi * pi * inv_mass;
    }
    q_new = q;
    g_new = grad;
    double logp_new = logp;
    bool finite = true;
    for (std::size_t s = 0; s < cfg.leapfrog_steps && finite; ++s) {
      kernels::axpy(0.5 * h, g_new.data(), p.data(), d);
      kernels::axpy(h * inv_mass, p.data(), q_new.data(), d);
      logp_new = log_density(q_new, g_new);
      finite = std::isfinite(logp_new);
      if (finite) kernels::axpy(0.5 * h, g_new.data(), p.data(), d);
    }
    bool accept = false;
    if (finite) {
      double kinetic1 = 0.0;
      for (double pi : p) kinetic1 += 0.5 * pi * pi * inv_mass;
      const double log_ratio = (logp_new - kinetic1) - (logp - kinetic0);
      accept = std::isfinite(log_ratio) && std::log(rng.uniform_open()) < log_ratio;
    } else {
      ++chain.divergent;
    }
    if (accept) {
      q.swap(q_new);
      grad.swap(g_new);
      logp = logp_new;
    }

    if (it < cfg.warmup) {
      window_accepts += accept ? 1 : 0;
      if (++window_count == cfg.adapt_window) {
        const double rate = static_cast<double>(window_accepts) / static_cast<double>(window_count);
        if (rate >= 0.6) validated = eps;
        if (rate < 0.6) eps *= 0.5;
        if (rate > 0.9) eps *= 2.0;
        window_accepts = 0;
        window_count = 0;
      }
      if (it + 1 == cfg.warmup && validated > 0.0) eps = std::min(eps, validated);
      continue;
    }
    accepted += accept ? 1 : 0;
    if ((it - cfg.warmup + 1) % cfg.thin == 0) {
      chain.samples.push_back(q);
      chain.log_density.push_back(logp);
    }
  }
  const std::size_t post = total - cfg.warmup;
  chain.step_size = eps;
  chain.acceptance_rate =
      post == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(post);
  if (post > 0 && accepted == 0) {
    throw HmcError(fmt::format("HMC accepted no proposals after warmup (step size {})", eps));
  }
  return chain;
}

std::size_t BnnPosterior::dim() const {
  const auto dims = spec.dims();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
  return n;
}

std::vector<double> BnnPosterior::prior_std() const {
  const auto dims = spec.dims();
  std::vector<double> s;
  s.reserve(dim());
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    s.insert(s.end(), dims[l] * dims[l + 1], prior.weight_std(dims[l]));
    s.insert(s.end(), dims[l + 1], prior.sigma_b);
  }
  return s;
}

NetworkParams BnnPosterior::unwhiten(std::span<const double> z) const {
  if (z.size() != dim()) throw ShapeError("whitened parameter vector has wrong length");
  NetworkParams theta = zero_params(spec);
  std::size_t k = 0;
  for (auto& layer : theta.layers) {
    const double sw = prior.weight_std(layer.w.rows());
    for (double& v : layer.w.flat()) v = sw * z[k++];
    for (double& v : layer.b.flat()) v = prior.sigma_b * z[k++];
  }
  return theta;
}

double BnnPosterior::operator()(std::span<const double> z, std::span<double> grad) const {
  const NetworkParams theta = unwhiten(z);
  const std::size_t layers = theta.layers.size();
  // Forward, keeping post-activation inputs of every layer.
  std::vector<Matrix> inputs;
  inputs.reserve(layers);
  inputs.push_back(data.x);
  Matrix out;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix zl = matmul(inputs.back(), theta.layers[l].w);
    add_row_bias(zl, theta.layers[l].b);
    if (l + 1 < layers) {
      kernels::active().relu(zl.data(), zl.data(), zl.size());
      inputs.push_back(std::move(zl));
    } else {
      out = std::move(zl);
    }
  }
  const double inv_var = 1.0 / (lik.noise_std * lik.noise_std);
  double logp = 0.0;
  for (double v : z) logp -= 0.5 * v * v;
  Matrix dz(out.rows(), 1);
  for (std::size_t n = 0; n < out.rows(); ++n) {
    const double r = out[n] - data.y[n];
    logp -= 0.5 * r * r * inv_var;
    dz[n] = -r * inv_var;  // d logp / d f
  }
  // Backward through layers, writing d logp / d theta into grad.
  std::vector<std::size_t> offsets(layers);
  std::size_t k = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = k;
    k += theta.layers[l].w.size() + theta.layers[l].b.size();
  }
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& h = inputs[l];
    const DenseLayer& layer = theta.layers[l];
    const Matrix gw = matmul_tn(h, dz);
    double* gp = grad.data() + offsets[l];
    const double sw = prior.weight_std(layer.w.rows());
    for (std::size_t i = 0; i < gw.size(); ++i) gp[i] = sw * gw[i];
    gp += gw.size();
    for (std::size_t c = 0; c < dz.cols(); ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < dz.rows(); ++r) s += dz(r, c);
      gp[c] = prior.sigma_b * s;
    }
    if (l > 0) {
      Matrix dh = matmul_nt(dz, layer.w);
      kernels::active().relu_mask(h.data(), dh.data(), dh.size());
      dz = std::move(dh);
    }
  }
  for (std::size_t i = 0; i < z.size(); ++i) grad[i] -= z[i];
  return logp;
}

BnnHmcResult hmc_sample(const NetworkSpec& spec, const PriorConfig& prior, const Dataset& data,
                        const Likelihood& lik, const HmcConfig& cfg, RngStream& rng) {
  spec.validate();
  data.validate();
  if (spec.output_dim != 1) throw std::invalid_argument("HMC supports one output");
  const BnnPosterior posterior{spec, prior, data, lik};
  std::vector<double> z0(posterior.dim());
  for (double& v : z0) v = rng.normal();
  BnnHmcResult r;
  r.chain = hmc_sample(posterior, std::move(z0), cfg, rng);
  r.samples.reserve(r.chain.samples.size());
  for (const auto& z : r.chain.samples) r.samples.push_back(posterior.unwhiten(z));
  return r;
}

PredictiveMoments predictive_from_samples(const std::vector<NetworkParams>& samples,
                                          const Matrix& x) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two parameter samples");
  const std::size_t k = samples.front().spec.output_dim;
  std::vector<RunningMoments> acc(x.rows() * k);
  for (const auto& theta : samples) {
    const Matrix f = forward(theta, x);
    for (std::size_t i = 0; i < f.size(); ++i) acc[i].add(f[i]);
  }
  PredictiveMoments out{Matrix(x.rows(), k), Matrix(x.rows(), k), Matrix(x.rows(), k),
                        Matrix(x.rows(), k), samples.size()};
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out.mean[i] = acc[i].mean();
    out.var[i] = acc[i].variance();
    out.mean_se[i] = acc[i].mean_se();
    out.var_se[i] = acc[i].variance_se();
  }
  return out;
}

double split_rhat(std::span<const double> trace) {
  const std::size_t half = trace.size() / 2;
  if (half < 2) throw std::invalid_argument("split R-hat needs at least four draws");
  const auto a = trace.subspan(0, half);
  const auto b = trace.subspan(trace.size() - half, half);
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double w = 0.5 * (variance_of(a) + variance_of(b));
  const double n = static_cast<double>(half);
  const double grand = 0.5 * (ma + mb);
  const double between = n * ((ma - grand) * (ma - grand) + (mb - grand) * (mb - grand));
  if (w <= 0.0) return 1.0;
  const double var_plus = (n - 1.0) / n * w + between / n;
  return std::sqrt(var_plus / w);
}

nlohmann::json to_json(const HmcConfig& cfg) {
  return {{"step_size", cfg.step_size}, {"leapfrog_steps", cfg.leapfrog_steps},
          {"warmup", cfg.warmup},       {"samples", cfg.samples},
          {"mass", cfg.mass},           {"thin", cfg.thin},
          {"jitter", cfg.jitter},       {"adapt_window", cfg.adapt_window}};
}

}  // namespace inbetween
