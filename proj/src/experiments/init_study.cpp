#include "detail.hpp"
#include "inbetween/analysis/metrics.hpp"
#include "inbetween/experiments/datasets.hpp"

namespace inbetween {
namespace {

constexpr std::size_t kDepth = 2;
constexpr double kGridLo = -2.0;
constexpr double kGridHi = 2.0;
constexpr std::size_t kEvalPoints = 201;

}  // namespace

std::vector<double> anneal_schedule() {
  std::vector<double> a;
  for (int i = 10; i >= 0; --i) a.push_back(static_cast<double>(i) / 10.0);
  return a;
}

InitStudyResult run_init_study(const ExperimentConfig& cfg) {
  const ScaleConfig& sc = cfg.scale;
  nlohmann::json config = to_json(cfg);
  const TwoClusterConfig data_cfg{.per_cluster = 20};
  config["data"] = to_json(data_cfg);
  config["depth"] = kDepth;
  config["alpha_schedule"] = anneal_schedule();
  RunRecorder rec(cfg.outdir, "init-study", config);
  InitStudyResult out;

  for (std::uint64_t seed : sc.seeds) {
    const Dataset data = gen_two_cluster_1d(seed, kDepth, data_cfg);
    rec.table(cell_stem("data", kDepth, seed), detail::data_table(data));
    const NngpKernelConfig kernel = default_kernel(kDepth, 1);
    const GPModel gp = gp_fit(kernel, data, data_cfg.noise_std);
    const Matrix grid = Matrix::column_vector(linspace(kGridLo, kGridHi, sc.moment_grid));
    std::vector<double> target_mean;
    std::vector<double> target_var;
    for (const GaussianMoments& g : gp_predict(gp, grid)) {
      target_mean.push_back(g.mean);
      target_var.push_back(g.variance);
    }
    const std::vector<double> xs = linspace(kGridLo, kGridHi, kEvalPoints);
    const Matrix eval_x = Matrix::column_vector(xs);
    const std::vector<GaussianMoments> gp_eval = gp_predict(gp, eval_x);
    const std::size_t mid = detail::nearest(xs, 0.0);
    const CellSetup setup =
        detail::cell_setup(cfg, 1, kDepth, kernel.prior(), data_cfg.noise_std, seed);

    for (Method m : cfg.methods) {
      if (m != Method::kMfvi && m != Method::kMcdo) continue;
      InitStudyCell cell{.method = m, .seed = seed};
      try {
        ObjectiveSpec obj;
        obj.data = data;
        obj.lik = setup.lik;
        obj.prior = setup.prior;
        obj.mc_samples = sc.train_samples;
        obj.grid = grid;
        obj.target_mean = target_mean;
        obj.target_var = target_var;
        obj.moment_samples = sc.moment_samples;

        ParamDist q = m == Method::kMfvi ? ParamDist(prior_ffg(setup.spec, setup.prior))
                                         : initial_dist(Method::kMcdo, setup);
        CsvTable trace({"phase", "alpha", "iteration", "loss"});
        Prediction pre;
        const std::vector<double> schedule = anneal_schedule();
        for (std::size_t phase = 0; phase <= schedule.size(); ++phase) {
          // Phase 0 is pure moment matching, the last phase pure variational.
          const bool final_phase = phase == schedule.size();
          const double alpha = final_phase ? 0.0 : schedule[phase];
          if (alpha == 1.0) {
            obj.kind = ObjectiveKind::kMomentMatch;
          } else if (alpha == 0.0) {
            obj.kind = m == Method::kMfvi ? ObjectiveKind::kElbo : ObjectiveKind::kMcdo;
          } else {
            obj.kind = ObjectiveKind::kInterpolated;
            obj.alpha = alpha;
          }
          TrainConfig tc;
          tc.iterations = phase == 0 ? sc.init_moment_iterations
                          : final_phase ? sc.init_final_iterations
                                        : sc.init_anneal_iterations;
          tc.adam.learning_rate = sc.learning_rate;
          tc.seed = seed * 1009 + 700 + 20 * phase + static_cast<std::uint64_t>(m);
          tc.log_every = std::max<std::size_t>(1, tc.iterations / 20);
          std::vector<LossPoint> tr;
          q = train_dist(q, obj, tc, &tr);
          for (const LossPoint& p : tr) {
            trace.add_row({static_cast<double>(phase), alpha, static_cast<double>(p.iteration), p.loss});
          }
          if (phase == 0) pre = predict_dist(q, setup, eval_x);
        }
        const Prediction post = predict_dist(q, setup, eval_x);
        cell.gamma_mid_pre = overconfidence_ratio(gp_eval[mid].variance, pre.var[mid]);
        cell.gamma_mid_post = overconfidence_ratio(gp_eval[mid].variance, post.var[mid]);

        CsvTable t({"x", "gp_mean", "gp_var", "pre_mean", "pre_var", "post_mean", "post_var"});
        for (std::size_t i = 0; i < xs.size(); ++i) {
          t.add_row({xs[i], gp_eval[i].mean, gp_eval[i].variance, pre.mean[i], pre.var[i],
                     post.mean[i], post.var[i]});
        }
        rec.table(cell_stem(method_name(m), kDepth, seed), t);
        rec.table(cell_stem(method_name(m), kDepth, seed, "trace"), trace);
        cell.ok = true;
        rec.cell(method_name(m), kDepth, seed, true, {},
                 {{"gamma_mid_pre", cell.gamma_mid_pre}, {"gamma_mid_post", cell.gamma_mid_post}});
      } catch (const std::exception& e) {
        cell.error = e.what();
        rec.cell(method_name(m), kDepth, seed, false, cell.error, nlohmann::json::object());
      }
      out.cells.push_back(std::move(cell));
    }
  }
  out.manifest = rec.finish();
  return out;
}

}  // namespace inbetween
