#include "inbetween/analysis/fuzz.hpp"

#include <cmath>
#include <limits>

namespace inbetween {
namespace {

double log_uniform(RngStream& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

void track(FuzzSummary& s, const BoundReport& r) {
  ++s.checks;
  if (!r.holds()) ++s.violations;
  if (s.checks == 1 || r.max_violation > s.worst.max_violation) s.worst = r;
}

}  // namespace

FFGParams random_ffg_net(const NetworkSpec& spec, RngStream& rng) {
  FFGParams q = zero_ffg(spec, 1.0);
  for (auto& g : q.layers) {
    const double mean_scale = log_uniform(rng, 1e-2, 3.0);
    const double log_std_centre = rng.uniform(-6.0, 1.0);
    for (double& v : g.w_mean.flat()) v = mean_scale * rng.normal();
    for (double& v : g.b_mean.flat()) v = mean_scale * rng.normal();
    for (double& v : g.w_log_std.flat()) v = log_std_centre + rng.normal();
    for (double& v : g.b_log_std.flat()) v = log_std_centre + rng.normal();
  }
  return q;
}

MCDOParams random_mcdo_net(const NetworkSpec& spec, double p, bool drop_inputs, RngStream& rng) {
  MCDOParams q{spec, zero_params(spec).layers, p, drop_inputs};
  for (auto& l : q.layers) {
    const double scale = log_uniform(rng, 1e-2, 3.0);
    for (double& v : l.w.flat()) v = scale * rng.normal();
    for (double& v : l.b.flat()) v = scale * rng.normal();
  }
  return q;
}

LineProbe random_orthogonal_probe(std::size_t dim, RngStream& rng, std::size_t points) {
  LineProbe p;
  p.direction.assign(dim, 0.0);
  p.offset.assign(dim, 0.0);
  // Each coordinate moves along the line or sits at a fixed offset, never both.
  bool any_dir = false;
  for (std::size_t d = 0; d < dim; ++d) {
    if (rng.bernoulli(0.5)) {
      p.direction[d] = rng.normal();
      any_dir = true;
    } else {
      p.offset[d] = 2.0 * rng.normal();
    }
  }
  if (!any_dir) {
    const std::size_t d = rng.below(dim);
    p.offset[d] = 0.0;
    p.direction[d] = rng.normal();
  }
  p.lambda_lo = -rng.uniform(0.2, 3.0);
  p.lambda_hi = rng.uniform(0.2, 3.0);
  p.points = points;
  return p;
}

nlohmann::json to_json(const FuzzSummary& s) {
  return {{"check", s.check},         {"nets", s.nets},
          {"checks", s.checks},       {"violations", s.violations},
          {"worst", to_json(s.worst)}, {"verdict", s.passed() ? "holds" : "violated"}};
}

FuzzSummary fuzz_thm1(const FuzzConfig& cfg) {
  FuzzSummary s{"thm1", cfg.nets, 0, 0, {}};
  const RngStream root(cfg.seed, 101);
  for (std::size_t n = 0; n < cfg.nets; ++n) {
    RngStream rng = root.split(n);
    const std::size_t dim = 1 + n % 3;
    const FFGParams q = random_ffg_net(NetworkSpec{dim, {cfg.width}, 1}, rng);
    for (std::size_t p = 0; p < cfg.probes_per_net; ++p) {
      track(s, check_thm1(q, random_orthogonal_probe(dim, rng), cfg.tol));
    }
  }
  return s;
}

FuzzSummary fuzz_hypercube(const FuzzConfig& cfg, std::size_t dim) {
  FuzzSummary s{"hypercube_d" + std::to_string(dim), cfg.nets, 0, 0, {}};
  const RngStream root(cfg.seed, 202 + dim);
  for (std::size_t n = 0; n < cfg.nets; ++n) {
    RngStream rng = root.split(n);
    const FFGParams q = random_ffg_net(NetworkSpec{dim, {cfg.width}, 1}, rng);
    std::vector<double> half(dim);
    for (double& h : half) h = rng.uniform(0.1, 3.0);
    track(s, check_hypercube(q, half, dim == 2 ? 9 : 5, cfg.tol));
  }
  return s;
}

FuzzSummary fuzz_convexity(const FuzzConfig& cfg) {
  FuzzSummary s{"convexity_mcdo", cfg.nets, 0, 0, {}};
  const RngStream root(cfg.seed, 303);
  for (std::size_t n = 0; n < cfg.nets; ++n) {
    RngStream rng = root.split(n);
    const std::size_t dim = 1 + n % 3;
    const double p = rng.uniform(0.01, 0.9);
    const MCDOParams q = random_mcdo_net(NetworkSpec{dim, {cfg.width}, 1}, p, false, rng);
    for (std::size_t k = 0; k < cfg.probes_per_net; ++k) {
      std::vector<double> a(dim);
      std::vector<double> b(dim);
      for (double& v : a) v = 2.0 * rng.normal();
      for (double& v : b) v = 2.0 * rng.normal();
      track(s, check_convexity_mcdo(q, a, b, 21, cfg.tol));
    }
  }
  return s;
}

}  // namespace inbetween
