// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only if all pass.
// `--naval` runs the active-learning criterion alone and exits 77 when the
// dataset is not available.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "inbetween/analysis/bounds.hpp"
#include "inbetween/analysis/fuzz.hpp"
#include "inbetween/analysis/universal.hpp"
#include "inbetween/bnn/moments.hpp"
#include "inbetween/core/allocator.hpp"
#include "inbetween/core/gaussian.hpp"
#include "inbetween/core/stats.hpp"
#include "inbetween/experiments/datasets.hpp"
#include "inbetween/experiments/runs.hpp"
#include "inbetween/gp/nngp.hpp"
#include "inbetween/inference/hmc.hpp"
#include "inbetween/inference/train.hpp"
#include "support/fd_check.hpp"

namespace inbetween {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Verdict()> run;
};

constexpr double kSe = 4.0;

// ------------------------------------------------------------- moments

Verdict moments() {
  std::size_t worst_fail = 0;
  double worst_z = 0.0;
  auto z_of = [&](double diff, double se) {
    const double z = std::abs(diff) / std::max(se, 1e-300);
    worst_z = std::max(worst_z, z);
    if (z > kSe) ++worst_fail;
  };

  // Scalar ReLU moments on a 21 x 3 grid of (mu, sigma), 1e6 draws each. The
  // standard errors come from the exact raw moments E[relu(X)^k], k <= 4: far
  // in the negative tail every draw is 0 and the sample SE degenerates to 0.
  constexpr int kDraws = 1'000'000;
  RngStream rng(1, 11);
  for (double sd : {0.3, 1.0, 3.0}) {
    for (double mu : linspace(-3.0, 3.0, 21)) {
      RunningMoments first;
      RunningMoments second;
      for (int i = 0; i < kDraws; ++i) {
        const double r = std::max(0.0, mu + sd * rng.normal());
        first.add(r);
        second.add(r * r);
      }
      const double a = mu / sd;
      const double cdf = 0.5 * std::erfc(-a / std::sqrt(2.0));
      const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
      const double m1 = mu * cdf + sd * pdf;
      const double m2 = (mu * mu + sd * sd) * cdf + mu * sd * pdf;
      const double m3 = (mu * mu * mu + 3 * mu * sd * sd) * cdf + (mu * mu * sd + 2 * sd * sd * sd) * pdf;
      const double m4 = (std::pow(mu, 4) + 6 * mu * mu * sd * sd + 3 * std::pow(sd, 4)) * cdf +
                        (mu * mu * mu * sd + 5 * mu * std::pow(sd, 3)) * pdf;
      const double var = m2 - m1 * m1;
      const double central4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * std::pow(m1, 4);
      const double n = kDraws;
      const GaussianMoments m{mu, sd * sd};
      z_of(relu_gaussian_mean(m) - first.mean(), std::sqrt(var / n));
      z_of(relu_gaussian_var(m) - first.variance(), std::sqrt(std::max(central4 - var * var, 0.0) / n));
      z_of(relu_gaussian_second_moment(m) - second.mean(), std::sqrt(std::max(m4 - m2 * m2, 0.0) / n));
    }
  }
  const std::size_t scalar_fail = worst_fail;
  const double scalar_z = worst_z;

  // Closed-form network moments against predictive Monte Carlo.
  worst_z = 0.0;
  RngStream nets(2, 11);
  for (int n = 0; n < 50; ++n) {
    const std::size_t d = 1 + static_cast<std::size_t>(n) % 3;
    const NetworkSpec spec{d, {50}, 1};
    Matrix x(3, d);
    for (double& v : x.flat()) v = nets.normal();
    const FFGParams q = random_ffg_net(spec, nets);
    const MCDOParams r = random_mcdo_net(spec, nets.uniform(0.05, 0.5), false, nets);
    const PredictiveMoments mq = predictive_mc(q, x, 40000, nets.split(100 + n));
    const PredictiveMoments mr = predictive_mc(r, x, 40000, nets.split(200 + n));
    for (std::size_t i = 0; i < 3; ++i) {
      const GaussianMoments cq = closed_form_1hl_moments(q, x.row(i))[0];
      const GaussianMoments cr = closed_form_1hl_moments_mcdo(r, x.row(i))[0];
      z_of(cq.mean - mq.mean(i, 0), mq.mean_se(i, 0));
      z_of(cq.variance - mq.var(i, 0), mq.var_se(i, 0));
      z_of(cr.mean - mr.mean(i, 0), mr.mean_se(i, 0));
      z_of(cr.variance - mr.var(i, 0), mr.var_se(i, 0));
    }
  }
  const std::size_t net_fail = worst_fail - scalar_fail;
  return {worst_fail == 0,
          fmt::format("relu grid 189 checks, worst {:.2f} SE; 50+50 nets 600 checks, worst "
                      "{:.2f} SE; {} beyond {} SE",
                      scalar_z, worst_z, scalar_fail + net_fail, kSe)};
}

// -------------------------------------------------------- property suites

std::string suite_line(const FuzzSummary& s) {
  return fmt::format("{} {} nets/{} checks, {} violations, worst {:.3g}", s.check, s.nets,
                     s.checks, s.violations, s.worst.max_violation);
}

Verdict ffg_line_bound() {
  FuzzConfig cfg;
  cfg.nets = 10000;
  cfg.probes_per_net = 10;
  cfg.seed = 3;
  const FuzzSummary lines = fuzz_thm1(cfg);
  const FuzzSummary cube2 = fuzz_hypercube(cfg, 2);
  const FuzzSummary cube3 = fuzz_hypercube(cfg, 3);
  return {lines.passed() && cube2.passed() && cube3.passed(),
          suite_line(lines) + "; " + suite_line(cube2) + "; " + suite_line(cube3)};
}

Verdict mcdo_convexity() {
  FuzzConfig cfg;
  cfg.nets = 10000;
  cfg.probes_per_net = 10;
  cfg.seed = 4;
  const FuzzSummary s = fuzz_convexity(cfg);
  return {s.passed(), suite_line(s)};
}

// Short dropout training with dropped inputs, so the suite also covers nets
// an optimiser would produce.
MCDOParams trained_drop_inputs_net(const NetworkSpec& spec, std::uint64_t seed) {
  RngStream rng(seed, 31);
  const MCDOParams init = init_mcdo(spec, 0.1, true, rng);
  ObjectiveSpec obj;
  obj.kind = ObjectiveKind::kMcdo;
  obj.data = gen_two_cluster_1d(seed, 1);
  obj.lik = {0.1};
  obj.prior = {4.0, 1.0};
  obj.mc_samples = 8;
  TrainConfig tc;
  tc.iterations = 300;
  tc.adam.learning_rate = 1e-2;
  tc.seed = seed;
  return std::get<MCDOParams>(train_dist(init, obj, tc));
}

Verdict dropped_inputs() {
  RngStream rng(5, 11);
  std::size_t hull_fail = 0;
  std::size_t prop_fail = 0;
  double hull_worst = -1e300;
  double prop_worst = -1e300;
  const Matrix s1 = Matrix::from_rows({{-1.0}, {1.0}});
  const Matrix s2 = Matrix::from_rows({{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}});
  for (int n = 0; n < 100; ++n) {
    const bool trained = n >= 90;
    const std::size_t d = trained ? 1 : 1 + static_cast<std::size_t>(n) % 2;
    const MCDOParams shallow =
        trained ? trained_drop_inputs_net(NetworkSpec{1, {50}, 1}, static_cast<std::uint64_t>(n))
                : random_mcdo_net(NetworkSpec{d, {50}, 1}, rng.uniform(0.05, 0.5), true, rng);
    const McBoundReport t5 =
        check_thm5_convex_hull(shallow, d == 1 ? s1 : s2, 20000, rng.split(1000 + n));
    hull_fail += t5.report.holds() ? 0 : 1;
    hull_worst = std::max(hull_worst, t5.report.max_violation);

    const NetworkSpec deep{1, std::vector<std::size_t>(1 + static_cast<std::size_t>(n) % 3, 50), 1};
    const MCDOParams dq = trained ? trained_drop_inputs_net(deep, static_cast<std::uint64_t>(n))
                                  : random_mcdo_net(deep, rng.uniform(0.05, 0.5), true, rng);
    const double x = rng.uniform(-2.0, 0.0);
    const McBoundReport pr = check_deep_dropout_prop(dq, x, x + rng.uniform(0.1, 3.0), 20000,
                                                     rng.split(2000 + n));
    prop_fail += pr.report.holds() ? 0 : 1;
    prop_worst = std::max(prop_worst, pr.report.max_violation);
  }
  return {hull_fail == 0 && prop_fail == 0,
          fmt::format("hull bound {} of 100 violated (worst lhs-rhs {:.3g}); gap proposition {} "
                      "of 100 violated (worst {:.3g}); 10 of each trained",
                      hull_fail, hull_worst, prop_fail, prop_worst)};
}

// ---------------------------------------------------------- universality

struct TargetPair {
  std::string name;
  std::vector<double> grid;
  std::vector<double> g;
  std::vector<double> h;
};

std::vector<TargetPair> universal_targets() {
  std::vector<TargetPair> out;
  {
    // GP posterior on two 1D clusters: the in-between shape the 1HL families miss.
    TargetPair t{"gp-posterior", linspace(-2.0, 2.0, 41), {}, {}};
    const Dataset data = gen_two_cluster_1d(0, 1);
    const GPModel gp = gp_fit(NngpKernelConfig{1, std::sqrt(2.0), 1.0, 1}, data, 0.1);
    for (const GaussianMoments& m : gp_predict(gp, Matrix::column_vector(t.grid))) {
      t.g.push_back(m.mean);
      t.h.push_back(m.variance);
    }
    out.push_back(std::move(t));
  }
  {
    TargetPair t{"sine-bump", linspace(-2.0, 2.0, 41), {}, {}};
    for (double x : t.grid) {
      t.g.push_back(std::sin(1.5 * x));
      t.h.push_back(0.05 + std::exp(-x * x / (2 * 0.3 * 0.3)));
    }
    out.push_back(std::move(t));
  }
  {
    TargetPair t{"cubic-two-bumps", linspace(-1.5, 1.5, 31), {}, {}};
    for (double x : t.grid) {
      t.g.push_back(0.3 * x * x * x - 0.5 * x);
      t.h.push_back(0.02 + 0.5 * std::exp(-(x - 0.7) * (x - 0.7) / 0.08) +
                    0.3 * std::exp(-(x + 0.8) * (x + 0.8) / 0.05));
    }
    out.push_back(std::move(t));
  }
  return out;
}

Verdict universality() {
  bool pass = true;
  std::string detail;
  for (const TargetPair& t : universal_targets()) {
    for (Family fam : {Family::kFfg, Family::kMcdo}) {
      UniversalBudget b;
      b.knots = 9;
      // Dropout noise on the mean path scales as range(g)^2 / mean_units; the
      // GP-posterior mean spans ~40 units.
      b.copies = 512;
      b.mean_units = 512;
      UniversalFit prev;
      bool halves = true;
      UniversalFit last;
      for (std::size_t rung = 0; rung < 4; ++rung) {
        const UniversalNet net =
            construct_universal_2hl(t.grid, t.g, t.h, fam, b.scaled(std::size_t{1} << rung));
        last = universal_fit_error(universal_moments(net, t.grid, 50000, RngStream(16, rung)),
                                   t.g, t.h);
        if (rung > 0) {
          halves = halves &&
                   last.mean_sup_error <= 0.5 * prev.mean_sup_error + last.mean_slack &&
                   last.var_sup_error <= 0.5 * prev.var_sup_error + last.var_slack;
        }
        prev = last;
      }
      const bool ok = halves && last.mean_sup_error < 0.1 && last.var_sup_error < 0.1;
      pass = pass && ok;
      detail += fmt::format("{}{}/{}: mean {:.3g} var {:.3g}{}", detail.empty() ? "" : "; ", t.name,
                            fam == Family::kFfg ? "ffg" : "mcdo", last.mean_sup_error,
                            last.var_sup_error, halves ? "" : " (ladder did not halve)");
    }
  }
  return {pass, detail};
}

// --------------------------------------------------------------- figures

ExperimentConfig desk(std::vector<Method> methods, std::vector<std::size_t> depths) {
  ExperimentConfig cfg;
  cfg.scale = scale_config(Scale::kDesk);
  cfg.methods = std::move(methods);
  cfg.depths = std::move(depths);
  return cfg;
}

std::string outdir_for;  // set from the command line; empty keeps results in memory

Verdict fig2() {
  ExperimentConfig cfg = desk({Method::kMfvi, Method::kMcdo}, {1});
  cfg.outdir = outdir_for;
  const Fig2Result r = run_fig2(cfg);
  bool pass = r.fits.size() == 2;
  std::string detail;
  for (const Fig2Fit& f : r.fits) {
    const bool ok = f.ok && f.bound.holds() && f.underestimates() && f.target_exceeds_bound();
    pass = pass && ok;
    detail += fmt::format("{}{}: bound {} (max {:.3g}), Var(0) {:.4g} vs target {:.4g}, bound "
                          "line at 0 {:.4g}",
                          detail.empty() ? "" : "; ", method_name(f.method),
                          f.bound.holds() ? "holds" : "violated", f.bound.max_violation,
                          f.fit_var_origin, f.target_var_origin, f.bound_origin);
    if (!f.ok) detail += " [" + f.error + "]";
  }
  return {pass, detail};
}

Verdict fig3() {
  ExperimentConfig cfg = desk(all_methods(), {1});
  cfg.outdir = outdir_for;
  const Fig3Result r = run_fig3(cfg);
  const Fig3Cell* gp = r.find(Method::kGp, 1, 0);
  const Fig3Cell* mfvi = r.find(Method::kMfvi, 1, 0);
  const Fig3Cell* mcdo = r.find(Method::kMcdo, 1, 0);
  const Fig3Cell* hmc = r.find(Method::kHmc, 1, 0);
  for (const Fig3Cell* c : {gp, mfvi, mcdo, hmc}) {
    if (c == nullptr || !c->ok) {
      return {false, fmt::format("cell failed: {}", c ? c->error : std::string("missing"))};
    }
  }
  const bool gp_ok = gp->slice.std_mid > 2.0 * gp->slice.std_clusters;
  const bool mfvi_ok = mfvi->slice.gamma_mid > 3.0;
  const bool mcdo_ok = mcdo->slice.gamma_mid > 3.0;
  const double hmc_rel = std::abs(hmc->slice.std_mid - gp->slice.std_mid) / gp->slice.std_mid;
  const bool hmc_ok = hmc_rel < 0.3;
  return {gp_ok && mfvi_ok && mcdo_ok && hmc_ok,
          fmt::format("gp std mid {:.3g} vs clusters {:.3g}; gamma mid mfvi {:.3g}, mcdo {:.3g}; "
                      "hmc std mid {:.3g} ({:.0f}% from gp)",
                      gp->slice.std_mid, gp->slice.std_clusters, mfvi->slice.gamma_mid,
                      mcdo->slice.gamma_mid, hmc->slice.std_mid, 100.0 * hmc_rel)};
}

Verdict fig4() {
  ExperimentConfig cfg = desk({Method::kGp, Method::kMfvi, Method::kMcdo}, {1, 2, 3, 4});
  cfg.outdir = outdir_for;
  const Fig4Result r = run_fig4(cfg);
  bool pass = r.cells.size() == 12;
  std::string detail;
  for (const Fig4Cell& c : r.cells) {
    if (!c.ok) {
      pass = false;
      detail += fmt::format("{}{} d{} failed", detail.empty() ? "" : "; ", method_name(c.method),
                            c.depth);
      continue;
    }
    bool ok = true;
    if (c.method == Method::kGp) {
      ok = c.gamma.min == 1.0 && c.gamma.max == 1.0;
    } else {
      ok = c.gamma.median >= 1.0 && c.gamma.max >= 3.0;
    }
    pass = pass && ok;
    if (c.method != Method::kGp || !ok) {
      detail += fmt::format("{}{} d{} median {:.3g} max {:.3g}", detail.empty() ? "" : "; ",
                            method_name(c.method), c.depth, c.gamma.median, c.gamma.max);
    }
  }
  return {pass, detail};
}

// -------------------------------------------------------------- table 1

Verdict active_learning(const Dataset& data) {
  ExperimentConfig cfg = desk({Method::kGp, Method::kMfvi}, {1, 2});
  cfg.outdir = outdir_for;
  const ActiveResult r = run_active_learning(cfg, data);
  const ActiveSummaryRow* gp_a = r.row(Method::kGp, 1, Acquisition::kActive);
  const ActiveSummaryRow* gp_r = r.row(Method::kGp, 1, Acquisition::kRandom);
  const ActiveSummaryRow* mf_a = r.row(Method::kMfvi, 1, Acquisition::kActive);
  const ActiveSummaryRow* mf_r = r.row(Method::kMfvi, 1, Acquisition::kRandom);
  if (!gp_a || !gp_r || !mf_a || !mf_r) return {false, "missing summary rows"};
  const bool gp_ok = gp_a->mean_rmse < 0.5 * gp_r->mean_rmse;
  const bool mf_ok = mf_a->mean_rmse > mf_r->mean_rmse;
  return {gp_ok && mf_ok,
          fmt::format("1HL gp active {:.4f} vs random {:.4f}; 1HL mfvi active {:.4f} vs random "
                      "{:.4f} ({} seeds)",
                      gp_a->mean_rmse, gp_r->mean_rmse, mf_a->mean_rmse, mf_r->mean_rmse,
                      gp_a->seeds)};
}

// ----------------------------------------------------------------- nngp

Verdict nngp() {
  RngStream rng(6, 11);
  const NngpKernelConfig cfg{1, 1.5, 1.0, 2};
  Matrix x(10, 2);
  for (double& v : x.flat()) v = rng.normal();
  const FFGParams prior = prior_ffg(NetworkSpec{2, {4096}, 1}, cfg.prior());
  std::vector<RunningMoments> m(10);
  for (int s = 0; s < 10000; ++s) {
    RngStream r = rng.split(static_cast<std::uint64_t>(s));
    const Matrix f = forward(sample_params(prior, r), x);
    for (std::size_t i = 0; i < 10; ++i) m[i].add(f[i]);
  }
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    const double k = nngp_diag(cfg, x.row(i));
    worst_rel = std::max(worst_rel, std::abs(m[i].variance() - k) / k);
  }
  std::vector<std::size_t> outside;
  double lo = 1e300;
  double hi = 0.0;
  for (std::size_t depth = 1; depth <= 10; ++depth) {
    for (double c : {1.0, -1.0}) {
      const double sd = std::sqrt(nngp_diag(default_kernel(depth, 2), std::vector<double>{c, c}));
      lo = std::min(lo, sd);
      hi = std::max(hi, sd);
      if ((sd < 10.0 || sd > 15.0) && (outside.empty() || outside.back() != depth)) {
        outside.push_back(depth);
      }
    }
  }
  std::string out_list;
  for (std::size_t d : outside) {
    out_list += fmt::format("{}{} (std {:.3f})", out_list.empty() ? "" : ", ", d,
                            std::sqrt(nngp_diag(default_kernel(d, 2), std::vector<double>{1, 1})));
  }
  return {worst_rel < 0.05 && outside.empty(),
          fmt::format("width-4096 prior variance worst rel err {:.3f}; table stds in [{:.3f}, "
                      "{:.3f}]{}",
                      worst_rel, lo, hi, outside.empty() ? "" : "; outside [10,15] at depth " + out_list)};
}

// ------------------------------------------------------------ gradients

Verdict gradients() {
  RngStream rng(7, 11);
  auto toy = [&](std::size_t n) {
    Dataset d{Matrix(n, 2), std::vector<double>(n), {}};
    for (double& v : d.x.flat()) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) d.y[i] = std::sin(d.x(i, 0)) + 0.1 * rng.normal();
    return d;
  };
  double worst = 0.0;
  std::size_t checked = 0;
  std::string worst_name;
  auto note = [&](const std::string& name, double err, std::size_t n) {
    checked += n;
    if (err >= worst) {
      worst = err;
      worst_name = name;
    }
  };
  for (int net = 0; net < 5; ++net) {
    const NetworkSpec spec{2, std::vector<std::size_t>(1 + net % 3, 5), 1};
    const ParamDist ffg = random_ffg_net(spec, rng);
    const ParamDist mcdo = random_mcdo_net(spec, 0.25, false, rng);
    const ParamDist mcdo_in = random_mcdo_net(spec, 0.25, true, rng);
    ObjectiveSpec base;
    base.data = toy(6);
    base.lik = {0.3};
    base.prior = {1.5, 1.0};
    base.mc_samples = 4;
    base.grid = Matrix(6, 2);
    for (double& v : base.grid.flat()) v = rng.normal();
    base.target_mean.assign(6, 0.2);
    base.target_var.assign(6, 0.5);
    base.moment_samples = 8;
    base.alpha = 0.6;
    struct Case {
      const char* name;
      const ParamDist* dist;
      ObjectiveKind kind;
    };
    const Case cases[] = {
        {"elbo", &ffg, ObjectiveKind::kElbo},
        {"mcdo", &mcdo, ObjectiveKind::kMcdo},
        {"mcdo-inputs", &mcdo_in, ObjectiveKind::kMcdo},
        {"moment-ffg", &ffg, ObjectiveKind::kMomentMatch},
        {"moment-mcdo", &mcdo, ObjectiveKind::kMomentMatch},
        {"interp-ffg", &ffg, ObjectiveKind::kInterpolated},
        {"interp-mcdo", &mcdo, ObjectiveKind::kInterpolated},
    };
    for (const Case& c : cases) {
      ObjectiveSpec obj = base;
      obj.kind = c.kind;
      RngStream pick(100 + static_cast<std::uint64_t>(net));
      const testing::FdReport r = testing::fd_check(make_loss(*c.dist, obj), param_blocks(*c.dist),
                                                    RngStream(12, 3), 30, pick);
      note(c.name, r.max_rel_error, r.checked);
    }
    // Unnormalised log posterior used by HMC.
    const BnnPosterior post{spec, {1.5, 1.0}, base.data, {0.2}};
    std::vector<double> z(post.dim());
    for (double& v : z) v = rng.normal();
    std::vector<double> g(z.size());
    std::vector<double> scratch(z.size());
    post(z, g);
    double g_max = 1.0;
    for (double v : g) g_max = std::max(g_max, std::abs(v));
    auto central = [&](std::size_t i, double h) {
      auto zp = z;
      auto zm = z;
      zp[i] += h;
      zm[i] -= h;
      return (post(zp, scratch) - post(zm, scratch)) / (2 * h);
    };
    double err = 0.0;
    for (std::size_t i = 0; i < z.size(); i += 2) {
      const double fd = (4.0 * central(i, 5e-5) - central(i, 1e-4)) / 3.0;
      err = std::max(err, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6 * g_max}));
    }
    note("hmc-log-posterior", err, (z.size() + 1) / 2);
  }
  return {worst < 1e-4, fmt::format("{} coordinates over 8 objectives x 5 nets; worst rel err "
                                    "{:.2e} ({})",
                                    checked, worst, worst_name)};
}

}  // namespace
}  // namespace inbetween

int main(int argc, char** argv) {
  using namespace inbetween;
  tune_allocator();
  CLI::App app{"Acceptance criteria"};
  bool naval = false;
  std::string data;
  std::vector<std::string> only;
  app.add_flag("--naval", naval, "Run only the active-learning criterion (needs the Naval file)");
  app.add_option("--data", data, "Naval data.txt");
  app.add_option("--only", only, "Run only the named criteria");
  app.add_option("--outdir", outdir_for, "Also write experiment outputs here");
  CLI11_PARSE(app, argc, argv);

  std::vector<Criterion> criteria;
  if (naval) {
    const std::filesystem::path path = resolve_naval_path(data);
    if (path.empty()) {
      std::cout << "SKIP active: Naval data not found (set INBETWEEN_DATA_DIR or pass --data)\n";
      return 77;
    }
    const Dataset d = load_naval(path);
    criteria.push_back({"active", [d] { return active_learning(d); }});
  } else {
    criteria = {{"moments", moments},
                {"ffg-line-bound", ffg_line_bound},
                {"mcdo-convexity", mcdo_convexity},
                {"dropped-inputs", dropped_inputs},
                {"universality", universality},
                {"fig2", fig2},
                {"fig3", fig3},
                {"fig4", fig4},
                {"nngp", nngp},
                {"gradients", gradients}};
  }

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += v.pass ? 0 : 1;
    std::cout << fmt::format("{} {}: {} [{:.1f} s]", v.pass ? "PASS" : "FAIL", c.name, v.detail,
                             secs)
              << std::endl;
  }
  if (!naval && only.empty()) {
    std::cout << "SKIP active: runs under `acceptance --naval` (ctest acceptance_naval)\n";
  }
  return failed == 0 ? 0 : 1;
}
