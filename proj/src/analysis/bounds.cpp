#include "inbetween/analysis/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "inbetween/core/cholesky.hpp"

namespace inbetween {
namespace {

std::string vec_string(std::span<const double> v) {
  return fmt::format("({:.6g})", fmt::join(v, ", "));
}

double closed_var(const FFGParams& q, std::span<const double> x, std::size_t k) {
  return closed_form_1hl_moments(q, x).at(k).variance;
}

double closed_var(const MCDOParams& q, std::span<const double> x, std::size_t k) {
  return closed_form_1hl_moments_mcdo(q, x).at(k).variance;
}

void require_one_hidden(const NetworkSpec& spec, const char* what) {
  if (spec.depth() != 1) {
    throw std::invalid_argument(fmt::format("{}: network must have one hidden layer", what));
  }
}

}  // namespace

bool LineProbe::coordinatewise_orthogonal(double tol) const {
  for (std::size_t d = 0; d < direction.size(); ++d) {
    if (std::abs(direction[d] * offset[d]) > tol) return false;
  }
  return true;
}

void LineProbe::validate() const {
  if (direction.empty() || direction.size() != offset.size()) {
    throw InvalidProbe("probe direction and offset must be nonempty and the same size");
  }
  if (!(lambda_lo <= lambda_hi) || points < 2) {
    throw InvalidProbe("probe needs lambda_lo <= lambda_hi and at least two points");
  }
}

std::vector<double> LineProbe::lambdas() const {
  validate();
  std::vector<double> l(points);
  for (std::size_t i = 0; i < points; ++i) {
    l[i] = lambda_lo + (lambda_hi - lambda_lo) * static_cast<double>(i) /
                           static_cast<double>(points - 1);
  }
  if (lambda_lo < 0.0 && lambda_hi > 0.0 && std::find(l.begin(), l.end(), 0.0) == l.end()) {
    l.insert(std::upper_bound(l.begin(), l.end(), 0.0), 0.0);
  }
  return l;
}

std::vector<double> LineProbe::at(double lambda) const {
  std::vector<double> x(direction.size());
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = direction[d] * lambda + offset[d];
  return x;
}

Matrix LineProbe::points_matrix() const {
  const auto l = lambdas();
  Matrix m(l.size(), dim());
  for (std::size_t i = 0; i < l.size(); ++i) {
    const auto x = at(l[i]);
    std::copy(x.begin(), x.end(), m.row(i).begin());
  }
  return m;
}

nlohmann::json to_json(const LineProbe& p) {
  return {{"direction", p.direction}, {"offset", p.offset},  {"lambda_lo", p.lambda_lo},
          {"lambda_hi", p.lambda_hi}, {"points", p.points}};
}

nlohmann::json to_json(const BoundReport& r) {
  return {{"check", r.check},
          {"probe", r.probe},
          {"max_violation", r.max_violation},
          {"tolerance", r.tolerance},
          {"comparisons", r.comparisons},
          {"witness", r.witness},
          {"verdict", r.holds() ? "holds" : "violated"}};
}

nlohmann::json to_json(const McBoundReport& r) {
  auto j = to_json(r.report);
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["se"] = r.se;
  j["samples"] = r.samples;
  return j;
}

BoundReport check_thm1(const FFGParams& q, const LineProbe& probe, double tol, std::size_t k) {
  require_one_hidden(q.spec, "check_thm1");
  probe.validate();
  if (probe.dim() != q.spec.input_dim) throw InvalidProbe("probe dimension != network input");
  if (!probe.coordinatewise_orthogonal()) {
    throw InvalidProbe("probe must satisfy direction_d * offset_d == 0");
  }
  const auto lam = probe.lambdas();
  std::vector<double> var(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) var[i] = closed_var(q, probe.at(lam[i]), k);

  // prefix[r] = argmax of var over the r+1 lambdas closest to zero.
  std::vector<std::size_t> by_abs(lam.size());
  std::iota(by_abs.begin(), by_abs.end(), 0);
  std::stable_sort(by_abs.begin(), by_abs.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(lam[a]) < std::abs(lam[b]); });
  std::vector<std::size_t> prefix(lam.size());
  for (std::size_t r = 0; r < by_abs.size(); ++r) {
    prefix[r] = (r == 0 || var[by_abs[r]] > var[prefix[r - 1]]) ? by_abs[r] : prefix[r - 1];
  }
  auto inner_max = [&](double radius) {
    // Last position in by_abs with |lambda| <= radius.
    std::size_t lo = 0;
    std::size_t hi = by_abs.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (std::abs(lam[by_abs[mid]]) <= radius) lo = mid + 1; else hi = mid;
    }
    return prefix[lo - 1];
  };

  BoundReport r{"thm1", fmt::format("direction {} offset {}", vec_string(probe.direction),
                                    vec_string(probe.offset)),
                -std::numeric_limits<double>::infinity(), tol, {}, 0};
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (lam[i] > 0.0) continue;
    for (std::size_t j = 0; j < lam.size(); ++j) {
      if (lam[j] < 0.0) continue;
      const std::size_t s = inner_max(std::min(-lam[i], lam[j]));
      const double v = var[s] - var[i] - var[j];
      ++r.comparisons;
      if (v > r.max_violation) {
        r.max_violation = v;
        r.witness = {probe.at(lam[s]), probe.at(lam[i]), probe.at(lam[j])};
      }
    }
  }
  return r;
}

BoundReport check_hypercube(const FFGParams& q, std::span<const double> half_widths,
                            std::size_t per_dim, double tol, std::size_t k) {
  require_one_hidden(q.spec, "check_hypercube");
  const std::size_t d = half_widths.size();
  if (d != q.spec.input_dim || d == 0 || d > 20 || per_dim < 2) {
    throw std::invalid_argument("check_hypercube: bad dimensions");
  }
  double vertex_sum = 0.0;
  std::vector<double> x(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    for (std::size_t i = 0; i < d; ++i) x[i] = (mask >> i & 1U) ? half_widths[i] : -half_widths[i];
    vertex_sum += closed_var(q, x, k);
  }
  BoundReport r{"hypercube", fmt::format("half widths {}", vec_string(half_widths)),
                -std::numeric_limits<double>::infinity(), tol, {}, 0};
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = half_widths[i] * (-1.0 + 2.0 * static_cast<double>(idx[i]) /
                                          static_cast<double>(per_dim - 1));
    }
    const double v = closed_var(q, x, k) - vertex_sum;
    ++r.comparisons;
    if (v > r.max_violation) {
      r.max_violation = v;
      r.witness = {x};
    }
    std::size_t i = 0;
    while (i < d && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == d) break;
  }
  return r;
}

BoundReport check_convexity_mcdo(const MCDOParams& q, std::span<const double> x_a,
                                 std::span<const double> x_b, std::size_t points, double tol,
                                 std::size_t k) {
  require_one_hidden(q.spec, "check_convexity_mcdo");
  if (q.drop_inputs) throw std::invalid_argument("check_convexity_mcdo: inputs must be kept");
  if (x_a.size() != q.spec.input_dim || x_b.size() != q.spec.input_dim || points < 3) {
    throw std::invalid_argument("check_convexity_mcdo: bad segment");
  }
  std::vector<double> t(points);
  std::vector<double> var(points);
  std::vector<std::vector<double>> xs(points, std::vector<double>(x_a.size()));
  for (std::size_t i = 0; i < points; ++i) {
    t[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    for (std::size_t d = 0; d < x_a.size(); ++d) xs[i][d] = (1 - t[i]) * x_a[d] + t[i] * x_b[d];
    var[i] = closed_var(q, xs[i], k);
  }
  BoundReport r{"convexity_mcdo",
                fmt::format("segment {} -> {}", vec_string(x_a), vec_string(x_b)),
                -std::numeric_limits<double>::infinity(), tol, {}, 0};
  const double end_max = std::max(var.front(), var.back());
  for (std::size_t m = 0; m < points; ++m) {
    const double v = var[m] - end_max;
    ++r.comparisons;
    if (v > r.max_violation) {
      r.max_violation = v;
      r.witness = {xs[m], xs.front(), xs.back()};
    }
  }
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = i + 2; j < points; ++j) {
      for (std::size_t m = i + 1; m < j; ++m) {
        const double w = (t[m] - t[i]) / (t[j] - t[i]);
        const double v = var[m] - ((1 - w) * var[i] + w * var[j]);
        ++r.comparisons;
        if (v > r.max_violation) {
          r.max_violation = v;
          r.witness = {xs[m], xs[i], xs[j]};
        }
      }
    }
  }
  return r;
}

namespace {

// Least squares on the passive columns via normal equations.
std::vector<double> passive_solve(const Matrix& a, std::span<const double> b,
                                  const std::vector<std::size_t>& passive) {
  const std::size_t n = passive.size();
  Matrix ata(n, n);
  std::vector<double> atb(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < a.rows(); ++r) atb[i] += a(r, passive[i]) * b[r];
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, passive[i]) * a(r, passive[j]);
      ata(i, j) = s;
    }
  }
  const Matrix sol = Cholesky(ata).solve(Matrix::column_vector(atb));
  return {sol.flat().begin(), sol.flat().end()};
}

// Lawson-Hanson nonnegative least squares: min ||A w - b||, w >= 0.
std::vector<double> nnls(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.cols();
  const double tol = 1e-12;
  std::vector<double> w(n, 0.0);
  std::vector<bool> in_p(n, false);
  auto gradient = [&] {
    std::vector<double> resid(b.begin(), b.end());
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t c = 0; c < n; ++c) resid[r] -= a(r, c) * w[c];
    }
    std::vector<double> g(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t r = 0; r < a.rows(); ++r) g[c] += a(r, c) * resid[r];
    }
    return g;
  };
  for (std::size_t outer = 0; outer < 3 * n + 10; ++outer) {
    const auto g = gradient();
    std::size_t best = n;
    double gmax = tol;
    for (std::size_t c = 0; c < n; ++c) {
      if (!in_p[c] && g[c] > gmax) {
        gmax = g[c];
        best = c;
      }
    }
    if (best == n) break;
    in_p[best] = true;
    for (std::size_t inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<std::size_t> passive;
      for (std::size_t c = 0; c < n; ++c) {
        if (in_p[c]) passive.push_back(c);
      }
      const auto s = passive_solve(a, b, passive);
      if (*std::min_element(s.begin(), s.end()) > 0.0) {
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i < passive.size(); ++i) w[passive[i]] = s[i];
        break;
      }
      double alpha = 1.0;
      for (std::size_t i = 0; i < passive.size(); ++i) {
        if (s[i] <= 0.0) alpha = std::min(alpha, w[passive[i]] / (w[passive[i]] - s[i]));
      }
      for (std::size_t i = 0; i < passive.size(); ++i) {
        const std::size_t c = passive[i];
        w[c] += alpha * (s[i] - w[c]);
        if (w[c] <= tol) {
          w[c] = 0.0;
          in_p[c] = false;
        }
      }
    }
  }
  return w;
}

}  // namespace

std::optional<std::vector<double>> origin_hull_weights(const Matrix& s) {
  if (s.rows() == 0) return std::nullopt;
  // Columns are the points; the last row enforces sum w = 1.
  Matrix a(s.cols() + 1, s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t d = 0; d < s.cols(); ++d) a(d, i) = s(i, d);
    a(s.cols(), i) = 1.0;
  }
  std::vector<double> b(s.cols() + 1, 0.0);
  b.back() = 1.0;
  const auto w = nnls(a, b);
  double resid = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double v = -b[r];
    for (std::size_t c = 0; c < a.cols(); ++c) v += a(r, c) * w[c];
    resid += v * v;
  }
  if (std::sqrt(resid) >= 1e-8) return std::nullopt;
  return w;
}

McBoundReport check_thm5_convex_hull(const MCDOParams& q, const Matrix& s, std::size_t samples,
                                     const RngStream& rng, double slack_se) {
  require_one_hidden(q.spec, "check_thm5_convex_hull");
  if (!q.drop_inputs) throw std::invalid_argument("check_thm5_convex_hull: inputs must be dropped");
  if (s.cols() != q.spec.input_dim) throw ShapeError("hull points have the wrong dimension");
  if (!origin_hull_weights(s)) throw NotInHull("origin is not in the convex hull of S");
  Matrix x(s.rows() + 1, s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    std::copy(s.row(i).begin(), s.row(i).end(), x.row(i + 1).begin());
  }
  const auto pm = predictive_mc(q, x, samples, rng);
  std::size_t arg = 1;
  for (std::size_t i = 2; i < x.rows(); ++i) {
    if (pm.var(i, 0) > pm.var(arg, 0)) arg = i;
  }
  McBoundReport out;
  out.lhs = pm.var(0, 0);
  out.rhs = pm.var(arg, 0);
  out.se = std::hypot(pm.var_se(0, 0), pm.var_se(arg, 0));
  out.samples = samples;
  out.report = BoundReport{"thm5_convex_hull", fmt::format("{} hull points", s.rows()),
                           out.lhs - out.rhs, slack_se * out.se,
                           {std::vector<double>(s.cols(), 0.0),
                            std::vector<double>(x.row(arg).begin(), x.row(arg).end())},
                           s.rows()};
  return out;
}

double deep_dropout_gap_bound(double eps, double p) {
  if (!(eps >= 0.0) || !(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("deep_dropout_gap_bound: need eps >= 0 and p in (0, 1)");
  }
  return 2.0 * eps * std::sqrt(2.0 / p);
}

McBoundReport check_deep_dropout_prop(const MCDOParams& q, double x, double x2,
                                      std::size_t samples, const RngStream& rng,
                                      double slack_se) {
  if (!q.drop_inputs) throw std::invalid_argument("check_deep_dropout_prop: inputs must be dropped");
  if (q.spec.input_dim != 1) throw std::invalid_argument("check_deep_dropout_prop: 1D input only");
  const Matrix pts = Matrix::column_vector(std::vector<double>{x, x2});
  const auto pm = predictive_mc(q, pts, samples, rng);
  const std::size_t arg = pm.var(0, 0) >= pm.var(1, 0) ? 0 : 1;
  const double eps = std::sqrt(std::max(pm.var(arg, 0), 0.0));
  const double eps_se = eps > 0.0 ? pm.var_se(arg, 0) / (2.0 * eps) : 0.0;
  const double factor = 2.0 * std::sqrt(2.0 / q.p);

  McBoundReport out;
  out.lhs = std::abs(pm.mean(0, 0) - pm.mean(1, 0));
  out.rhs = factor * eps;
  out.se = std::hypot(std::hypot(pm.mean_se(0, 0), pm.mean_se(1, 0)), factor * eps_se);
  out.samples = samples;
  out.report = BoundReport{"deep_dropout_prop", fmt::format("x = {}, x' = {}", x, x2),
                           out.lhs - out.rhs, slack_se * out.se, {{x}, {x2}}, 1};
  return out;
}

}  // namespace inbetween
