#include <limits>

#include "detail.hpp"
#include "inbetween/experiments/datasets.hpp"

namespace inbetween {

RandomClustersResult run_random_clusters(const ExperimentConfig& cfg) {
  nlohmann::json config = to_json(cfg);
  RandomClusterConfig base;
  config["data"] = to_json(base);
  RunRecorder rec(cfg.outdir, "random-clusters", config);
  RandomClustersResult out;

  for (std::size_t depth : cfg.depths) {
    for (std::uint64_t seed : cfg.scale.seeds) {
      RandomClusterConfig rc = base;
      rc.depth = depth;
      const RandomClusters clusters = gen_random_clusters(seed, rc);
      rec.table(cell_stem("data", depth, seed), detail::data_table(clusters.data));
      const Matrix line = clusters.probe.points_matrix();
      const std::vector<double> lambdas = clusters.probe.lambdas();
      const std::size_t mid = detail::nearest(lambdas, 0.5);
      const CellSetup setup = detail::cell_setup(cfg, rc.dim, depth, {rc.sigma_w, rc.sigma_b},
                                                 rc.noise_std, seed);

      std::optional<Prediction> gp;
      try {
        gp = fit_predict(Method::kGp, setup, clusters.data, line);
      } catch (const std::exception&) {
        gp.reset();
      }

      for (Method m : cfg.methods) {
        if (m == Method::kHmc && depth > 2) continue;
        RandomClustersCell cell{.method = m, .depth = depth, .seed = seed};
        try {
          Prediction p;
          if (m == Method::kMcdo && depth == 1) {
            // Keep the fitted network so the convexity bound can be checked.
            std::vector<LossPoint> trace;
            const ParamDist q = fit_variational(m, setup, clusters.data, &trace);
            p = predict_dist(q, setup, line);
            p.trace = std::move(trace);
            cell.convexity = check_convexity_mcdo(std::get<MCDOParams>(q), clusters.centre_a,
                                                  clusters.centre_b, 41);
          } else {
            p = fit_predict(m, setup, clusters.data, line);
          }
          const std::vector<double> gamma =
              gp ? detail::gamma_curve(gp->var, p.var)
                 : std::vector<double>(lambdas.size(), std::numeric_limits<double>::quiet_NaN());
          cell.gamma_mid = gamma[mid];
          CsvTable t({"lambda", "mean", "std", "gamma"});
          for (std::size_t i = 0; i < lambdas.size(); ++i) {
            t.add_row({lambdas[i], p.mean[i], detail::std_of(p.var[i]), gamma[i]});
          }
          rec.table(cell_stem(method_name(m), depth, seed), t);
          cell.ok = true;
          nlohmann::json info = p.info;
          info["gamma_mid"] = cell.gamma_mid;
          info["centre_a"] = clusters.centre_a;
          info["centre_b"] = clusters.centre_b;
          if (cell.convexity) info["convexity"] = to_json(*cell.convexity);
          rec.cell(method_name(m), depth, seed, true, {}, info);
        } catch (const std::exception& e) {
          cell.error = e.what();
          rec.cell(method_name(m), depth, seed, false, cell.error, nlohmann::json::object());
        }
        out.cells.push_back(std::move(cell));
      }
    }
  }
  out.manifest = rec.finish();
  return out;
}

}  // namespace inbetween
