// Command-line front end for the experiment drivers.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "inbetween/core/allocator.hpp"
#include "inbetween/experiments/datasets.hpp"
#include "inbetween/experiments/runs.hpp"

namespace {

using namespace inbetween;

struct Options {
  std::string outdir = "results";
  std::string scale = "desk";
  bool paper_scale = false;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> depths;
  std::string methods;
  bool sqrt2_prior = false;
  std::string data;
  std::size_t nets = 10000;
  std::size_t probes = 10;
};

constexpr int kExitCellFailed = 1;
constexpr int kExitNoData = 3;

ExperimentConfig make_config(const Options& o, std::vector<std::size_t> default_depths,
                             std::vector<Method> default_methods) {
  ExperimentConfig cfg;
  cfg.scale = scale_config(o.paper_scale ? Scale::kPaper : parse_scale(o.scale));
  if (!o.seeds.empty()) cfg.scale.seeds = o.seeds;
  cfg.depths = o.depths.empty() ? std::move(default_depths) : o.depths;
  cfg.methods = o.methods.empty() ? std::move(default_methods) : parse_methods(o.methods);
  cfg.outdir = o.outdir;
  cfg.sqrt2_prior = o.sqrt2_prior;
  return cfg;
}

int report_cells(const nlohmann::json& manifest) {
  int failed = 0;
  for (const auto& c : manifest["cells"]) {
    const bool ok = c["status"] == "ok";
    failed += ok ? 0 : 1;
    std::string line = fmt::format("  {:5} depth {} seed {}: {}", c["method"].get<std::string>(),
                                   c["depth"].get<std::size_t>(), c["seed"].get<std::uint64_t>(),
                                   c["status"].get<std::string>());
    if (!ok) line += " (" + c["error"].get<std::string>() + ")";
    std::cout << line << '\n';
  }
  std::cout << fmt::format("{}: {} cells, {} failed, {:.1f} s\n",
                           manifest["experiment"].get<std::string>(), manifest["cells"].size(),
                           failed, manifest["wall_time_seconds"].get<double>());
  return failed == 0 ? 0 : kExitCellFailed;
}

int cmd_fig2(const Options& o) {
  const Fig2Result r = run_fig2(make_config(o, {1}, {Method::kMfvi, Method::kMcdo}));
  for (const Fig2Fit& f : r.fits) {
    if (!f.ok) continue;
    std::cout << fmt::format(
        "{} seed {}: bound {} (max violation {:.3g}); Var(0) {:.4g} vs target {:.4g}; "
        "bound at 0 {:.4g}\n",
        method_name(f.method), f.seed, f.bound.holds() ? "holds" : "VIOLATED",
        f.bound.max_violation, f.fit_var_origin, f.target_var_origin, f.bound_origin);
  }
  return report_cells(r.manifest);
}

int cmd_fig3(const Options& o) {
  const Fig3Result r = run_fig3(make_config(o, {1}, all_methods()));
  for (const Fig3Cell& c : r.cells) {
    if (!c.ok) continue;
    std::cout << fmt::format("{} depth {} seed {}: std mid {:.4g}, clusters {:.4g}, gamma mid {:.4g}\n",
                             method_name(c.method), c.depth, c.seed, c.slice.std_mid,
                             c.slice.std_clusters, c.slice.gamma_mid);
  }
  return report_cells(r.manifest);
}

int cmd_fig4(const Options& o) {
  const Fig4Result r = run_fig4(make_config(o, {1, 2, 3, 4}, all_methods()));
  for (const Fig4Cell& c : r.cells) {
    if (!c.ok) continue;
    std::cout << fmt::format("{} depth {} seed {}: gamma min {:.3g} q1 {:.3g} median {:.3g} q3 {:.3g} max {:.3g}\n",
                             method_name(c.method), c.depth, c.seed, c.gamma.min, c.gamma.q1,
                             c.gamma.median, c.gamma.q3, c.gamma.max);
  }
  return report_cells(r.manifest);
}

int cmd_random_clusters(const Options& o) {
  ExperimentConfig cfg = make_config(o, {1, 3}, {Method::kGp, Method::kMfvi, Method::kMcdo});
  if (o.sqrt2_prior) std::cerr << "note: random-clusters always uses sigma_w = sqrt(2)\n";
  const RandomClustersResult r = run_random_clusters(cfg);
  for (const RandomClustersCell& c : r.cells) {
    if (!c.ok) continue;
    std::string extra;
    if (c.convexity) extra = fmt::format(", convexity {}", c.convexity->holds() ? "holds" : "VIOLATED");
    std::cout << fmt::format("{} depth {} seed {}: gamma mid {:.4g}{}\n", method_name(c.method),
                             c.depth, c.seed, c.gamma_mid, extra);
  }
  return report_cells(r.manifest);
}

int cmd_active(const Options& o) {
  const std::filesystem::path path = resolve_naval_path(o.data);
  if (path.empty()) {
    std::cerr << "Naval data not found. Pass --data <path to data.txt> or set "
                 "INBETWEEN_DATA_DIR so that $INBETWEEN_DATA_DIR/naval/data.txt exists.\n";
    return kExitNoData;
  }
  const Dataset data = load_naval(path);
  std::cout << fmt::format("loaded {}: {} rows, {} features, PCA first share {:.3f}\n",
                           path.string(), data.size(), data.dim(), pca_first_share(data.x));
  const ActiveResult r =
      run_active_learning(make_config(o, {1, 2}, {Method::kGp, Method::kMfvi, Method::kMcdo}), data);
  for (const ActiveSummaryRow& row : r.table) {
    std::cout << fmt::format("{} depth {} {}: RMSE {:.4f} +- {:.4f} ({} seeds)\n",
                             method_name(row.method), row.depth,
                             row.mode == Acquisition::kActive ? "active" : "random", row.mean_rmse,
                             row.se_rmse, row.seeds);
  }
  return report_cells(r.manifest);
}

int cmd_init_study(const Options& o) {
  const InitStudyResult r = run_init_study(make_config(o, {2}, {Method::kMfvi, Method::kMcdo}));
  for (const InitStudyCell& c : r.cells) {
    if (!c.ok) continue;
    std::cout << fmt::format("{} seed {}: gamma at 0 before {:.4g}, after {:.4g}\n",
                             method_name(c.method), c.seed, c.gamma_mid_pre, c.gamma_mid_post);
  }
  return report_cells(r.manifest);
}

int cmd_check_theorems(const Options& o) {
  FuzzConfig fuzz;
  fuzz.nets = o.nets;
  fuzz.probes_per_net = o.probes;
  const ExperimentConfig cfg = make_config(o, {1}, {Method::kMfvi, Method::kMcdo});
  fuzz.seed = cfg.scale.seeds.front();
  const TheoremSweepResult r = run_check_theorems(cfg, fuzz);
  for (const FuzzSummary& s : r.suites) {
    std::cout << fmt::format("{}: {} nets, {} checks, {} violations, worst {:.3g}\n", s.check,
                             s.nets, s.checks, s.violations, s.worst.max_violation);
  }
  return r.passed() ? 0 : kExitCellFailed;
}

}  // namespace

int main(int argc, char** argv) {
  inbetween::tune_allocator();
  CLI::App app{"Variance bounds and in-between uncertainty experiments for ReLU BNNs"};
  app.require_subcommand(1);
  // Global options are also accepted after the subcommand.
  app.fallthrough();
  Options o;
  app.add_option("--outdir", o.outdir, "Output directory")->capture_default_str();
  app.add_option("--scale", o.scale, "Budget preset")
      ->check(CLI::IsMember({"smoke", "desk", "paper"}))
      ->capture_default_str();
  app.add_flag("--paper-scale", o.paper_scale, "Shorthand for --scale paper");
  app.add_option("--seeds", o.seeds, "Comma-separated seeds")->delimiter(',');
  app.add_option("--depths", o.depths, "Comma-separated hidden-layer counts")->delimiter(',');
  app.add_option("--methods", o.methods, "Comma-separated subset of gp,mfvi,mcdo,hmc");
  app.add_flag("--sqrt2-prior", o.sqrt2_prior, "sigma_w = sqrt(2) at every depth");
  app.add_option("--data", o.data, "Naval data.txt (default $INBETWEEN_DATA_DIR/naval/data.txt)");

  int rc = 0;
  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&rc, &o, fn] { rc = fn(o); });
    return sub;
  };
  add("fig2", "Moment-match 1HL FFG and MCDO to a GP with in-between uncertainty", cmd_fig2);
  add("fig3", "2D two-cluster regression: slices and heatmaps", cmd_fig3);
  add("fig4", "Overconfidence-ratio boxplots over depth", cmd_fig4);
  add("random-clusters", "Random 5D clusters, predictive along the joining segment",
      cmd_random_clusters);
  add("active", "Active vs random acquisition on Naval", cmd_active);
  add("init-study", "Moment-match initialisation then annealed variational training",
      cmd_init_study);
  CLI::App* thm = add("check-theorems", "Randomised sweeps of the closed-form variance bounds",
                      cmd_check_theorems);
  thm->add_option("--nets", o.nets, "Random networks per suite")->capture_default_str();
  thm->add_option("--probes", o.probes, "Line probes per network")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
