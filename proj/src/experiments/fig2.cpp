#include <limits>

#include "detail.hpp"
#include "inbetween/experiments/datasets.hpp"

namespace inbetween {
namespace {

constexpr double kGridLo = -2.0;
constexpr double kGridHi = 2.0;
constexpr std::size_t kEvalPoints = 201;

ParamDist moment_init(Method m, const CellSetup& setup) {
  if (m == Method::kMfvi) return prior_ffg(setup.spec, setup.prior);
  return initial_dist(Method::kMcdo, setup);
}

Fig2Fit fit_one(Method m, const CellSetup& setup, const Matrix& grid,
                const std::vector<double>& target_mean, const std::vector<double>& target_var,
                const Matrix& eval_x, const std::vector<GaussianMoments>& eval_target,
                RunRecorder& rec) {
  Fig2Fit fit;
  fit.method = m;
  fit.seed = setup.seed;

  ObjectiveSpec obj;
  obj.kind = ObjectiveKind::kMomentMatch;
  obj.grid = grid;
  obj.target_mean = target_mean;
  obj.target_var = target_var;
  obj.moment_samples = setup.scale.moment_samples;
  TrainConfig tc;
  tc.iterations = setup.scale.moment_iterations;
  tc.adam.learning_rate = setup.scale.learning_rate;
  tc.seed = setup.seed * 1009 + 500 + static_cast<std::uint64_t>(m);
  tc.log_every = std::max<std::size_t>(1, tc.iterations / 100);
  std::vector<LossPoint> trace;
  const ParamDist q = train_dist(moment_init(m, setup), obj, tc, &trace);

  const MomentCurves fitted = closed_form_curves(q, eval_x);
  const std::vector<double> xs(eval_x.data(), eval_x.data() + eval_x.rows());
  const std::size_t i0 = detail::nearest(xs, 0.0);
  const std::size_t il = detail::nearest(xs, -1.0);
  const std::size_t ir = detail::nearest(xs, 1.0);
  fit.fit_var_origin = fitted.var[i0];
  fit.fit_var_left = fitted.var[il];
  fit.fit_var_right = fitted.var[ir];
  fit.target_var_origin = eval_target[i0].variance;

  const std::vector<double> left{-1.0};
  const std::vector<double> right{1.0};
  if (m == Method::kMfvi) {
    LineProbe probe{{1.0}, {0.0}, -1.0, 1.0, 41};
    fit.bound = check_thm1(std::get<FFGParams>(q), probe);
    fit.bound_origin = fit.fit_var_left + fit.fit_var_right;
  } else {
    fit.bound = check_convexity_mcdo(std::get<MCDOParams>(q), left, right);
    fit.bound_origin = 0.5 * (fit.fit_var_left + fit.fit_var_right);
  }

  CsvTable t({"x", "target_mean", "target_var", "fit_mean", "fit_var", "bound"});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double bound = std::numeric_limits<double>::quiet_NaN();
    if (xs[i] >= -1.0 && xs[i] <= 1.0) {
      // Sum bound is flat on [-1, 1]; the convexity bound is the chord.
      bound = m == Method::kMfvi
                  ? fit.bound_origin
                  : fit.fit_var_left + (xs[i] + 1.0) * 0.5 * (fit.fit_var_right - fit.fit_var_left);
    }
    t.add_row({xs[i], eval_target[i].mean, eval_target[i].variance, fitted.mean[i], fitted.var[i],
               bound});
  }
  rec.table(cell_stem(method_name(m), 1, setup.seed), t);
  CsvTable tr({"iteration", "loss"});
  for (const LossPoint& p : trace) tr.add_row({static_cast<double>(p.iteration), p.loss});
  rec.table(cell_stem(method_name(m), 1, setup.seed, "trace"), tr);
  fit.ok = true;
  return fit;
}

}  // namespace

Fig2Result run_fig2(const ExperimentConfig& cfg) {
  nlohmann::json config = to_json(cfg);
  const TwoClusterConfig data_cfg{.per_cluster = 20};
  config["data"] = to_json(data_cfg);
  config["grid"] = {{"lo", kGridLo}, {"hi", kGridHi}, {"points", cfg.scale.moment_grid}};
  RunRecorder rec(cfg.outdir, "fig2", config);
  Fig2Result out;

  for (std::uint64_t seed : cfg.scale.seeds) {
    const Dataset data = gen_two_cluster_1d(seed, 1, data_cfg);
    const NngpKernelConfig kernel = default_kernel(1, 1);
    const GPModel gp = gp_fit(kernel, data, data_cfg.noise_std);
    rec.table(cell_stem("data", 1, seed), detail::data_table(data));

    const std::vector<double> g = linspace(kGridLo, kGridHi, cfg.scale.moment_grid);
    const Matrix grid = Matrix::column_vector(g);
    std::vector<double> target_mean;
    std::vector<double> target_var;
    for (const GaussianMoments& m : gp_predict(gp, grid)) {
      target_mean.push_back(m.mean);
      target_var.push_back(m.variance);
    }
    const Matrix eval_x = Matrix::column_vector(linspace(kGridLo, kGridHi, kEvalPoints));
    const std::vector<GaussianMoments> eval_target = gp_predict(gp, eval_x);

    CellSetup setup = detail::cell_setup(cfg, 1, 1, kernel.prior(), data_cfg.noise_std, seed);
    for (Method m : cfg.methods) {
      if (m != Method::kMfvi && m != Method::kMcdo) continue;
      try {
        Fig2Fit f = fit_one(m, setup, grid, target_mean, target_var, eval_x, eval_target, rec);
        rec.cell(method_name(m), 1, seed, true, {},
                 {{"bound", to_json(f.bound)},
                  {"fit_var_origin", f.fit_var_origin},
                  {"fit_var_left", f.fit_var_left},
                  {"fit_var_right", f.fit_var_right},
                  {"target_var_origin", f.target_var_origin},
                  {"bound_origin", f.bound_origin}});
        out.fits.push_back(std::move(f));
      } catch (const std::exception& e) {
        rec.cell(method_name(m), 1, seed, false, e.what(), nlohmann::json::object());
        out.fits.push_back({.method = m, .seed = seed, .ok = false, .error = e.what()});
      }
    }
  }
  out.manifest = rec.finish();
  return out;
}

}  // namespace inbetween
