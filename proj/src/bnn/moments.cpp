#include "inbetween/bnn/moments.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "inbetween/core/stats.hpp"

namespace inbetween {
namespace {

void require_one_hidden_layer(const NetworkSpec& spec, std::size_t x_dim) {
  if (spec.depth() != 1) {
    throw std::invalid_argument(
        fmt::format("closed-form moments need one hidden layer, got depth {}", spec.depth()));
  }
  if (x_dim != spec.input_dim) {
    throw ShapeError(fmt::format("input has {} dims, network expects {}", x_dim, spec.input_dim));
  }
}

}  // namespace

PredictiveMoments predictive_mc(const ParamDist& q, const Matrix& x, std::size_t samples,
                                const RngStream& rng) {
  if (samples < 2) throw std::invalid_argument("predictive_mc needs at least two samples");
  const NetworkSpec& spec = spec_of(q);
  const std::size_t n = x.rows();
  const std::size_t k = spec.output_dim;
  std::vector<RunningMoments> acc(n * k);
  for (std::size_t m = 0; m < samples; ++m) {
    RngStream stream = rng.split(m);
    const Matrix f = forward(sample_params(q, stream), x);
    for (std::size_t i = 0; i < f.size(); ++i) acc[i].add(f[i]);
  }
  PredictiveMoments out{Matrix(n, k), Matrix(n, k), Matrix(n, k), Matrix(n, k), samples};
  for (std::size_t i = 0; i < n * k; ++i) {
    out.mean[i] = acc[i].mean();
    out.var[i] = acc[i].variance();
    out.mean_se[i] = acc[i].mean_se();
    out.var_se[i] = acc[i].variance_se();
  }
  return out;
}

std::vector<GaussianMoments> closed_form_1hl_moments(const FFGParams& q,
                                                     std::span<const double> x) {
  validate(q);
  require_one_hidden_layer(q.spec, x.size());
  const GaussianLayer& in = q.layers[0];
  const GaussianLayer& out = q.layers[1];
  const std::size_t width = q.spec.hidden[0];
  const std::size_t k_out = q.spec.output_dim;

  std::vector<double> act_mean(width);
  std::vector<double> act_var(width);
  std::vector<double> act_second(width);
  for (std::size_t i = 0; i < width; ++i) {
    double mu = in.b_mean(0, i);
    const double sb = std::exp(in.b_log_std(0, i));
    double var = sb * sb;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double su = std::exp(in.w_log_std(d, i));
      mu += in.w_mean(d, i) * x[d];
      var += su * su * x[d] * x[d];
    }
    const GaussianMoments a{mu, var};
    act_mean[i] = relu_gaussian_mean(a);
    act_var[i] = relu_gaussian_var(a);
    act_second[i] = act_var[i] + act_mean[i] * act_mean[i];
  }

  std::vector<GaussianMoments> result(k_out);
  for (std::size_t k = 0; k < k_out; ++k) {
    const double sb = std::exp(out.b_log_std(0, k));
    double mean = out.b_mean(0, k);
    double var = sb * sb;
    for (std::size_t i = 0; i < width; ++i) {
      const double mw = out.w_mean(i, k);
      const double sw = std::exp(out.w_log_std(i, k));
      mean += mw * act_mean[i];
      var += mw * mw * act_var[i] + sw * sw * act_second[i];
    }
    result[k] = {mean, var};
  }
  return result;
}

std::vector<GaussianMoments> closed_form_1hl_moments_mcdo(const MCDOParams& q,
                                                          std::span<const double> x) {
  validate(q);
  require_one_hidden_layer(q.spec, x.size());
  if (q.drop_inputs) {
    throw std::invalid_argument("closed-form MCDO moments require inputs to be kept");
  }
  const DenseLayer& in = q.layers[0];
  const DenseLayer& out = q.layers[1];
  const std::size_t width = q.spec.hidden[0];
  std::vector<double> act(width);
  for (std::size_t i = 0; i < width; ++i) {
    double a = in.b(0, i);
    for (std::size_t d = 0; d < x.size(); ++d) a += in.w(d, i) * x[d];
    act[i] = a > 0.0 ? a : 0.0;
  }
  const double keep = 1.0 - q.p;
  std::vector<GaussianMoments> result(q.spec.output_dim);
  for (std::size_t k = 0; k < result.size(); ++k) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      const double t = out.w(i, k) * act[i];
      s1 += t;
      s2 += t * t;
    }
    result[k] = {keep * s1 + out.b(0, k), q.p * keep * s2};
  }
  return result;
}

bool has_closed_form(const ParamDist& q) {
  if (spec_of(q).depth() != 1) return false;
  if (const auto* m = std::get_if<MCDOParams>(&q)) return !m->drop_inputs;
  return true;
}

MomentCurves closed_form_curves(const ParamDist& q, const Matrix& x, std::size_t k) {
  if (k >= spec_of(q).output_dim) throw std::out_of_range("output index");
  MomentCurves c{std::vector<double>(x.rows()), std::vector<double>(x.rows())};
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto m = std::visit(
        [&](const auto& d) {
          if constexpr (std::is_same_v<std::decay_t<decltype(d)>, FFGParams>) {
            return closed_form_1hl_moments(d, x.row(r));
          } else {
            return closed_form_1hl_moments_mcdo(d, x.row(r));
          }
        },
        q);
    c.mean[r] = m[k].mean;
    c.var[r] = m[k].variance;
  }
  return c;
}

}  // namespace inbetween
