#include "inbetween/experiments/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "inbetween/core/kernels.hpp"

namespace inbetween {
namespace {

// Stream ids: inputs and targets never share noise.
constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kTargetStream = 2;
constexpr std::uint64_t kCentreStream = 3;

Dataset two_cluster(std::uint64_t seed, std::size_t depth, const TwoClusterConfig& cfg,
                    const std::vector<std::vector<double>>& centres) {
  RngStream in_rng(seed, kInputStream);
  RngStream y_rng(seed, kTargetStream);
  Matrix x = cluster_inputs(centres, cfg.per_cluster, cfg.cluster_std, in_rng);
  NngpKernelConfig kernel = default_kernel(depth, centres.front().size());
  if (cfg.sigma_w) kernel.sigma_w = *cfg.sigma_w;
  std::vector<double> y = gp_targets(kernel, x, cfg.noise_std, y_rng);
  return Dataset{std::move(x), std::move(y), {}};
}

}  // namespace

Matrix cluster_inputs(const std::vector<std::vector<double>>& centres, std::size_t per_cluster,
                      double cluster_std, RngStream& rng) {
  if (centres.empty()) throw std::invalid_argument("need at least one cluster centre");
  const std::size_t dim = centres.front().size();
  Matrix x(centres.size() * per_cluster, dim);
  for (std::size_t c = 0; c < centres.size(); ++c) {
    if (centres[c].size() != dim) throw ShapeError("cluster centres differ in dimension");
    for (std::size_t i = 0; i < per_cluster; ++i) {
      auto row = x.row(c * per_cluster + i);
      for (std::size_t d = 0; d < dim; ++d) row[d] = rng.normal(centres[c][d], cluster_std);
    }
  }
  return x;
}

std::vector<double> gp_targets(const NngpKernelConfig& kernel, const Matrix& x,
                               double noise_std, RngStream& rng) {
  const Matrix f = sample_gp_prior(kernel, x, 1, rng);
  std::vector<double> y(x.rows());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(0, i) + rng.normal(0.0, noise_std);
  return y;
}

Dataset gen_two_cluster_2d(std::uint64_t seed, std::size_t depth, const TwoClusterConfig& cfg) {
  return two_cluster(seed, depth, cfg, {{1.0, 1.0}, {-1.0, -1.0}});
}

Dataset gen_two_cluster_1d(std::uint64_t seed, std::size_t depth, const TwoClusterConfig& cfg) {
  return two_cluster(seed, depth, cfg, {{-1.0}, {1.0}});
}

RandomClusters gen_random_clusters(std::uint64_t seed, const RandomClusterConfig& cfg) {
  if (cfg.dim == 0) throw std::invalid_argument("random clusters need dim >= 1");
  RngStream c_rng(seed, kCentreStream);
  const double radius = std::sqrt(static_cast<double>(cfg.dim));
  auto centre = [&] {
    std::vector<double> v(cfg.dim);
    double norm2 = 0.0;
    while (norm2 == 0.0) {
      for (double& e : v) e = c_rng.normal();
      norm2 = kernels::dot(v.data(), v.data(), v.size());
    }
    const double s = radius / std::sqrt(norm2);
    for (double& e : v) e *= s;
    return v;
  };
  RandomClusters out;
  out.centre_a = centre();
  out.centre_b = centre();
  out.kernel = {cfg.depth, cfg.sigma_w, cfg.sigma_b, cfg.dim};

  RngStream in_rng(seed, kInputStream);
  RngStream y_rng(seed, kTargetStream);
  Matrix x = cluster_inputs({out.centre_a, out.centre_b}, cfg.per_cluster, cfg.cluster_std, in_rng);
  std::vector<double> y = gp_targets(out.kernel, x, cfg.noise_std, y_rng);
  out.data = Dataset{std::move(x), std::move(y), {}};

  out.probe.offset = out.centre_a;
  out.probe.direction.resize(cfg.dim);
  for (std::size_t d = 0; d < cfg.dim; ++d) {
    out.probe.direction[d] = out.centre_b[d] - out.centre_a[d];
  }
  out.probe.lambda_lo = 0.0;
  out.probe.lambda_hi = 1.0;
  out.probe.points = 101;
  return out;
}

Dataset load_naval(const std::filesystem::path& path, const NavalOptions& opts) {
  std::ifstream is(path);
  if (!is) throw NavalFormatError(fmt::format("cannot open {}", path.string()));
  if (opts.expected_columns < 3) throw std::invalid_argument("naval needs >= 3 columns");
  const std::size_t features = opts.expected_columns - 2;
  if (opts.target > 1) throw std::invalid_argument("naval target must be 0 or 1");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) {
      throw NavalFormatError(fmt::format("{}:{}: non-numeric field", path.string(), line_no));
    }
    if (row.empty()) continue;
    if (row.size() != opts.expected_columns) {
      throw NavalFormatError(fmt::format("{}:{}: {} columns, expected {}", path.string(),
                                         line_no, row.size(), opts.expected_columns));
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != opts.expected_rows) {
    throw NavalFormatError(
        fmt::format("{}: {} rows, expected {}", path.string(), rows.size(), opts.expected_rows));
  }

  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < features; ++c) {
    const double first = rows.front()[c];
    const bool constant =
        std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r[c] == first; });
    if (!constant) keep.push_back(c);
  }
  Dataset data{Matrix(rows.size(), keep.size()), std::vector<double>(rows.size()), {}};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < keep.size(); ++j) data.x(r, j) = rows[r][keep[j]];
    data.y[r] = rows[r][features + opts.target];
  }
  if (opts.normalize) normalize(data);
  return data;
}

std::filesystem::path resolve_naval_path(const std::filesystem::path& explicit_path) {
  namespace fs = std::filesystem;
  if (!explicit_path.empty()) return fs::exists(explicit_path) ? explicit_path : fs::path{};
  if (const char* dir = std::getenv("INBETWEEN_DATA_DIR")) {
    const fs::path p = fs::path(dir) / "naval" / "data.txt";
    if (fs::exists(p)) return p;
  }
  return {};
}

double pca_first_share(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2 || d == 0) throw std::invalid_argument("PCA needs >= 2 rows and >= 1 column");
  Matrix centred = x;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
    mean /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) centred(r, c) -= mean;
  }
  const Matrix cov = matmul_tn(centred, centred);
  double trace = 0.0;
  for (std::size_t c = 0; c < d; ++c) trace += cov(c, c);
  if (trace <= 0.0) throw std::invalid_argument("PCA of constant data");

  // Power iteration; the Rayleigh quotient converges quadratically in the
  // vector error, so a loose vector tolerance still gives an accurate share.
  // Uneven start so no eigenvector of a symmetric toy input is orthogonal to it.
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.37 * static_cast<double>(i * i);
  const double v0 = std::sqrt(kernels::dot(v.data(), v.data(), d));
  for (double& e : v) e /= v0;
  std::vector<double> w(d);
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t i = 0; i < d; ++i) w[i] = kernels::dot(cov.row(i).data(), v.data(), d);
    const double norm = std::sqrt(kernels::dot(w.data(), w.data(), d));
    if (norm == 0.0) break;
    const double next = kernels::dot(v.data(), w.data(), d);
    double change = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      change = std::max(change, std::abs(w[i] / norm - v[i]));
      v[i] = w[i] / norm;
    }
    lambda = next;
    if (change < 1e-12) break;
  }
  return lambda / trace;
}

nlohmann::json to_json(const TwoClusterConfig& cfg) {
  return {{"per_cluster", cfg.per_cluster},
          {"cluster_std", cfg.cluster_std},
          {"noise_std", cfg.noise_std},
          {"sigma_w", cfg.sigma_w ? nlohmann::json(*cfg.sigma_w) : nlohmann::json("depth table")}};
}

nlohmann::json to_json(const RandomClusterConfig& cfg) {
  return {{"dim", cfg.dim},
          {"depth", cfg.depth},
          {"per_cluster", cfg.per_cluster},
          {"cluster_std", cfg.cluster_std},
          {"noise_std", cfg.noise_std},
          {"sigma_w", cfg.sigma_w},
          {"sigma_b", cfg.sigma_b}};
}

}  // namespace inbetween
