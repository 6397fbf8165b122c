#include "inbetween/analysis/universal.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "inbetween/core/stats.hpp"

namespace inbetween {
namespace {

double relu(double v) { return v > 0.0 ? v : 0.0; }

// Number of successes in n Bernoulli(prob) trials, by inversion from zero.
// Falls back to counting trials when the zero-success mass underflows.
std::size_t binomial(std::size_t n, double prob, RngStream& rng) {
  const double q = 1.0 - prob;
  const double log_p0 = static_cast<double>(n) * std::log1p(-prob);
  if (log_p0 < -600.0) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) k += rng.bernoulli(prob) ? 1 : 0;
    return k;
  }
  double pmf = std::exp(log_p0);
  double cdf = pmf;
  const double u = rng.uniform();
  std::size_t k = 0;
  while (u > cdf && k < n) {
    pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * prob / q;
    cdf += pmf;
    ++k;
  }
  return k;
}

double interp(std::span<const double> grid, std::span<const double> values, double x) {
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - grid.begin());
  const double t = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
  return (1 - t) * values[j - 1] + t * values[j];
}

FFGParams build_ffg(const ReluInterpolant& m, const ReluInterpolant& v, double out_bias,
                    const UniversalBudget& b) {
  const std::size_t km = m.knots.size();
  const std::size_t kv = v.knots.size();
  const NetworkSpec spec{1, {km + kv, 2}, 1};
  FFGParams q = zero_ffg(spec, b.tiny_std);
  auto& l0 = q.layers[0];
  l0.w_mean.fill(1.0);
  for (std::size_t k = 0; k < km; ++k) l0.b_mean[k] = -m.knots[k];
  for (std::size_t k = 0; k < kv; ++k) l0.b_mean[km + k] = -v.knots[k];
  auto& l1 = q.layers[1];
  for (std::size_t k = 0; k < km; ++k) l1.w_mean(k, 0) = m.slopes[k];
  for (std::size_t k = 0; k < kv; ++k) l1.w_mean(km + k, 1) = v.slopes[k];
  l1.b_mean[0] = m.intercept;
  l1.b_mean[1] = v.intercept;
  auto& l2 = q.layers[2];
  l2.w_mean[0] = 1.0;
  l2.w_mean[1] = 0.0;
  l2.w_log_std[1] = 0.0;  // unit variance on the variance-carrying weight
  l2.b_mean[0] = out_bias;
  return q;
}

MCDOParams build_mcdo(const ReluInterpolant& m, const ReluInterpolant& v, double out_bias,
                      const UniversalBudget& b) {
  const std::size_t km = m.knots.size();
  const std::size_t kv = v.knots.size();
  const std::size_t block = km + kv;
  const std::size_t n1 = block * b.copies;
  const std::size_t n2 = b.mean_units + 2;
  const NetworkSpec spec{1, {n1, n2}, 1};
  MCDOParams q{spec, zero_params(spec).layers, b.p, false};
  const double copy_scale = 1.0 / ((1.0 - b.p) * static_cast<double>(b.copies));
  auto& l0 = q.layers[0];
  auto& l1 = q.layers[1];
  l0.w.fill(1.0);
  for (std::size_t c = 0; c < b.copies; ++c) {
    const std::size_t base = c * block;
    for (std::size_t k = 0; k < km; ++k) {
      l0.b[base + k] = -m.knots[k];
      for (std::size_t j = 0; j < b.mean_units; ++j) l1.w(base + k, j) = m.slopes[k] * copy_scale;
    }
    for (std::size_t k = 0; k < kv; ++k) {
      l0.b[base + km + k] = -v.knots[k];
      l1.w(base + km + k, b.mean_units) = v.slopes[k] * copy_scale;
      l1.w(base + km + k, b.mean_units + 1) = v.slopes[k] * copy_scale;
    }
  }
  for (std::size_t j = 0; j < b.mean_units; ++j) l1.b[j] = m.intercept;
  l1.b[b.mean_units] = v.intercept;
  l1.b[b.mean_units + 1] = v.intercept;
  auto& l2 = q.layers[2];
  const double alpha = 1.0 / (static_cast<double>(b.mean_units) * (1.0 - b.p));
  for (std::size_t j = 0; j < b.mean_units; ++j) l2.w[j] = alpha;
  l2.w[b.mean_units] = 1.0;
  l2.w[b.mean_units + 1] = -1.0;
  l2.b[0] = out_bias;
  return q;
}

}  // namespace

UniversalBudget UniversalBudget::scaled(std::size_t factor) const {
  UniversalBudget b = *this;
  b.knots = (knots - 1) * factor + 1;  // nested knot sets
  b.copies *= factor;
  b.mean_units *= factor;
  return b;
}

double ReluInterpolant::operator()(double x) const {
  double s = intercept;
  for (std::size_t k = 0; k < knots.size(); ++k) s += slopes[k] * relu(x - knots[k]);
  return s;
}

ReluInterpolant fit_relu_interpolant(std::span<const double> grid, std::span<const double> values,
                                     std::size_t knots) {
  if (grid.size() < 2 || grid.size() != values.size() || knots < 2) {
    throw std::invalid_argument("fit_relu_interpolant: need >= 2 grid points and knots");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  }
  std::vector<double> xk(knots);
  std::vector<double> vk(knots);
  for (std::size_t k = 0; k < knots; ++k) {
    xk[k] = grid.front() +
            (grid.back() - grid.front()) * static_cast<double>(k) / static_cast<double>(knots - 1);
    vk[k] = interp(grid, values, xk[k]);
  }
  ReluInterpolant r;
  r.intercept = vk[0];
  double prev = 0.0;
  for (std::size_t k = 0; k + 1 < knots; ++k) {
    const double slope = (vk[k + 1] - vk[k]) / (xk[k + 1] - xk[k]);
    r.knots.push_back(xk[k]);
    r.slopes.push_back(slope - prev);
    prev = slope;
  }
  return r;
}

UniversalNet construct_universal_2hl(std::span<const double> grid, std::span<const double> g,
                                     std::span<const double> h, Family family,
                                     const UniversalBudget& budget) {
  if (g.size() != grid.size() || h.size() != grid.size()) {
    throw std::invalid_argument("construct_universal_2hl: targets must match the grid");
  }
  if (std::any_of(h.begin(), h.end(), [](double v) { return !(v >= 0.0); })) {
    throw std::invalid_argument("construct_universal_2hl: variance target must be >= 0");
  }
  if (!(budget.p > 0.0 && budget.p < 1.0) || budget.copies == 0 || budget.mean_units == 0 ||
      !(budget.margin > 0.0) || !(budget.tiny_std > 0.0)) {
    throw std::invalid_argument("construct_universal_2hl: invalid budget");
  }
  const double g_min = *std::min_element(g.begin(), g.end());
  std::vector<double> shifted(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) shifted[i] = g[i] - g_min + budget.margin;
  // Dropout carries the variance through (eps_a - eps_b) relu(a_v), whose
  // variance is 2 p (1 - p) relu(a_v)^2.
  const double var_scale = family == Family::kFfg ? 1.0 : 2.0 * budget.p * (1.0 - budget.p);
  std::vector<double> root(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) root[i] = std::sqrt(h[i] / var_scale);

  UniversalNet net;
  net.family = family;
  net.budget = budget;
  net.mean_net = fit_relu_interpolant(grid, shifted, budget.knots);
  net.var_net = fit_relu_interpolant(grid, root, budget.knots);
  net.output_bias = g_min - budget.margin;
  return net;
}

ParamDist materialize(const UniversalNet& net, std::size_t max_params) {
  const std::size_t km = net.mean_net.knots.size();
  const std::size_t kv = net.var_net.knots.size();
  const std::size_t n1 = net.family == Family::kFfg ? km + kv : (km + kv) * net.budget.copies;
  const std::size_t n2 = net.family == Family::kFfg ? 2 : net.budget.mean_units + 2;
  const std::size_t count = 2 * n1 + n1 * n2 + n2 + n2 + 1;
  if (count > max_params) {
    throw std::length_error(fmt::format("universal net has {} parameters (limit {})", count,
                                        max_params));
  }
  if (net.family == Family::kFfg) {
    return build_ffg(net.mean_net, net.var_net, net.output_bias, net.budget);
  }
  return build_mcdo(net.mean_net, net.var_net, net.output_bias, net.budget);
}

PredictiveMoments universal_moments(const UniversalNet& net, std::span<const double> x,
                                    std::size_t samples, const RngStream& rng) {
  if (net.family == Family::kFfg) {
    return predictive_mc(materialize(net), Matrix::column_vector(x), samples, rng);
  }
  if (samples < 2) throw std::invalid_argument("universal_moments: need at least 2 samples");
  const UniversalBudget& b = net.budget;
  const double keep = 1.0 - b.p;
  const double copy_scale = 1.0 / (keep * static_cast<double>(b.copies));
  const double alpha = 1.0 / (static_cast<double>(b.mean_units) * keep);
  const std::size_t km = net.mean_net.knots.size();
  const std::size_t kv = net.var_net.knots.size();
  // Unit activations relu(x - knot) do not depend on the draw.
  Matrix act_m(km, x.size());
  Matrix act_v(kv, x.size());
  for (std::size_t k = 0; k < km; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) act_m(k, i) = relu(x[i] - net.mean_net.knots[k]);
  }
  for (std::size_t k = 0; k < kv; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) act_v(k, i) = relu(x[i] - net.var_net.knots[k]);
  }
  std::vector<RunningMoments> acc(x.size());
  std::vector<double> a_m(x.size());
  std::vector<double> a_v(x.size());
  for (std::size_t s = 0; s < samples; ++s) {
    RngStream r = rng.split(s);
    std::fill(a_m.begin(), a_m.end(), net.mean_net.intercept);
    std::fill(a_v.begin(), a_v.end(), net.var_net.intercept);
    // Per-knot number of kept copies: copies - Binomial(copies, p).
    for (std::size_t k = 0; k < km; ++k) {
      const auto kept = b.copies - binomial(b.copies, b.p, r);
      const double w = net.mean_net.slopes[k] * copy_scale * static_cast<double>(kept);
      for (std::size_t i = 0; i < x.size(); ++i) a_m[i] += w * act_m(k, i);
    }
    for (std::size_t k = 0; k < kv; ++k) {
      const auto kept = b.copies - binomial(b.copies, b.p, r);
      const double w = net.var_net.slopes[k] * copy_scale * static_cast<double>(kept);
      for (std::size_t i = 0; i < x.size(); ++i) a_v[i] += w * act_v(k, i);
    }
    const std::size_t kept = b.mean_units - binomial(b.mean_units, b.p, r);
    const double ea = r.bernoulli(keep) ? 1.0 : 0.0;
    const double eb = r.bernoulli(keep) ? 1.0 : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc[i].add(alpha * static_cast<double>(kept) * relu(a_m[i]) + (ea - eb) * relu(a_v[i]) +
                 net.output_bias);
    }
  }
  PredictiveMoments out{Matrix(x.size(), 1), Matrix(x.size(), 1), Matrix(x.size(), 1),
                        Matrix(x.size(), 1), samples};
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.mean[i] = acc[i].mean();
    out.var[i] = acc[i].variance();
    out.mean_se[i] = acc[i].mean_se();
    out.var_se[i] = acc[i].variance_se();
  }
  return out;
}

UniversalFit universal_fit_error(const PredictiveMoments& m, std::span<const double> g,
                                 std::span<const double> h) {
  if (m.mean.rows() != g.size() || h.size() != g.size()) {
    throw ShapeError("universal_fit_error: targets do not match the moments");
  }
  UniversalFit f;
  for (std::size_t i = 0; i < g.size(); ++i) {
    f.mean_sup_error = std::max(f.mean_sup_error, std::abs(m.mean(i, 0) - g[i]));
    f.var_sup_error = std::max(f.var_sup_error, std::abs(m.var(i, 0) - h[i]));
    f.mean_slack = std::max(f.mean_slack, 4.0 * m.mean_se(i, 0));
    f.var_slack = std::max(f.var_slack, 4.0 * m.var_se(i, 0));
  }
  return f;
}

nlohmann::json to_json(const UniversalBudget& b) {
  return {{"knots", b.knots},       {"copies", b.copies}, {"mean_units", b.mean_units},
          {"p", b.p},               {"tiny_std", b.tiny_std}, {"margin", b.margin}};
}

nlohmann::json to_json(const UniversalFit& f) {
  return {{"mean_sup_error", f.mean_sup_error},
          {"var_sup_error", f.var_sup_error},
          {"mean_slack", f.mean_slack},
          {"var_slack", f.var_slack}};
}

}  // namespace inbetween
