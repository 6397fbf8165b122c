#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "detail.hpp"
#include "inbetween/analysis/metrics.hpp"

namespace inbetween {

nlohmann::json to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.emplace_back(method_name(m));
  return {{"scale", to_json(cfg.scale)},
          {"depths", cfg.depths},
          {"methods", methods},
          {"sqrt2_prior", cfg.sqrt2_prior},
          {"dropout_p", cfg.dropout_p}};
}

PriorConfig two_cluster_prior(const ExperimentConfig& cfg, std::size_t depth) {
  return {cfg.sqrt2_prior ? std::sqrt(2.0) : default_sigma_w(depth), 1.0};
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double span = hi - lo;
  const auto den = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + span * (static_cast<double>(i) / den);
  out.back() = hi;
  return out;
}

Matrix diagonal_slice(std::span<const double> lambdas) {
  Matrix x(lambdas.size(), 2);
  for (std::size_t i = 0; i < lambdas.size(); ++i) x(i, 0) = x(i, 1) = lambdas[i];
  return x;
}

namespace detail {

std::size_t nearest(std::span<const double> values, double target) {
  if (values.empty()) throw std::invalid_argument("nearest: empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (std::abs(values[i] - target) < std::abs(values[best] - target)) best = i;
  }
  return best;
}

CellSetup cell_setup(const ExperimentConfig& cfg, std::size_t input_dim, std::size_t depth,
                     const PriorConfig& prior, double noise_std, std::uint64_t seed) {
  CellSetup s;
  s.spec = NetworkSpec::uniform(input_dim, depth, cfg.scale.width, 1);
  s.prior = prior;
  s.lik = {noise_std};
  s.dropout_p = cfg.dropout_p;
  s.scale = cfg.scale;
  s.seed = seed;
  return s;
}

CsvTable data_table(const Dataset& d) {
  std::vector<std::string> cols;
  for (std::size_t c = 0; c < d.dim(); ++c) cols.push_back(fmt::format("x{}", c));
  cols.emplace_back("y");
  CsvTable t(std::move(cols));
  for (std::size_t r = 0; r < d.size(); ++r) {
    std::vector<double> row(d.x.row(r).begin(), d.x.row(r).end());
    row.push_back(d.y[r]);
    t.add_row(row);
  }
  return t;
}

std::vector<double> gamma_curve(std::span<const double> gp_var, std::span<const double> q_var) {
  if (gp_var.size() != q_var.size()) throw std::invalid_argument("gamma_curve: size mismatch");
  std::vector<double> out(gp_var.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = gp_var[i] > 0.0 && q_var[i] > 0.0 ? overconfidence_ratio(gp_var[i], q_var[i])
                                                : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double std_of(double var) { return std::sqrt(std::max(var, 0.0)); }

void write_fit_logs(RunRecorder& rec, Method m, std::size_t depth, std::uint64_t seed,
                    const Prediction& p) {
  if (!p.trace.empty()) {
    CsvTable t({"iteration", "loss"});
    for (const LossPoint& lp : p.trace) t.add_row({static_cast<double>(lp.iteration), lp.loss});
    rec.table(cell_stem(method_name(m), depth, seed, "trace"), t);
  }
  if (!p.chain.empty()) {
    CsvTable t({"iteration", "log_density"});
    for (std::size_t k = 0; k < p.chain.size(); ++k) {
      t.add_row({static_cast<double>((k + 1) * p.chain_thin), p.chain[k]});
    }
    rec.table(cell_stem(method_name(m), depth, seed, "chain"), t);
  }
}

}  // namespace detail
}  // namespace inbetween
