#include "detail.hpp"
#include "inbetween/experiments/datasets.hpp"

namespace inbetween {

Fig4Result run_fig4(const ExperimentConfig& cfg) {
  constexpr double kSliceEnd = 1.2;
  nlohmann::json config = to_json(cfg);
  const TwoClusterConfig data_cfg;
  config["data"] = to_json(data_cfg);
  config["slice"] = {{"from", {-kSliceEnd, -kSliceEnd}},
                     {"to", {kSliceEnd, kSliceEnd}},
                     {"points", cfg.scale.box_points}};
  RunRecorder rec(cfg.outdir, "fig4", config);
  Fig4Result out;

  const std::vector<double> lambdas = linspace(-kSliceEnd, kSliceEnd, cfg.scale.box_points);
  const Matrix slice = diagonal_slice(lambdas);
  CsvTable box({"method", "depth", "seed", "min", "q1", "median", "q3", "max"});

  for (std::size_t depth : cfg.depths) {
    for (std::uint64_t seed : cfg.scale.seeds) {
      const Dataset data = gen_two_cluster_2d(seed, depth, data_cfg);
      const CellSetup setup =
          detail::cell_setup(cfg, 2, depth, two_cluster_prior(cfg, depth), data_cfg.noise_std, seed);
      std::optional<Prediction> gp;
      std::string gp_error;
      try {
        gp = fit_predict(Method::kGp, setup, data, slice);
      } catch (const std::exception& e) {
        gp_error = e.what();
      }

      for (Method m : cfg.methods) {
        if (m == Method::kHmc && depth > 2) continue;
        Fig4Cell cell{.method = m, .depth = depth, .seed = seed};
        try {
          if (!gp) throw std::runtime_error("GP reference failed: " + gp_error);
          const Prediction p = m == Method::kGp ? *gp : fit_predict(m, setup, data, slice);
          const std::vector<double> gamma = detail::gamma_curve(gp->var, p.var);
          for (double g : gamma) {
            if (std::isnan(g)) throw std::runtime_error("non-positive predictive variance on slice");
          }
          cell.gamma = box_stats(gamma);
          CsvTable t({"lambda", "x0", "x1", "mean", "std", "gp_std", "gamma"});
          for (std::size_t i = 0; i < lambdas.size(); ++i) {
            t.add_row({lambdas[i], slice(i, 0), slice(i, 1), p.mean[i], detail::std_of(p.var[i]),
                       detail::std_of(gp->var[i]), gamma[i]});
          }
          rec.table(cell_stem(method_name(m), depth, seed), t);
          detail::write_fit_logs(rec, m, depth, seed, p);
          const BoxStats& b = cell.gamma;
          box.add_text_row({std::string(method_name(m)), std::to_string(depth), std::to_string(seed),
                            CsvTable::cell(b.min), CsvTable::cell(b.q1), CsvTable::cell(b.median),
                            CsvTable::cell(b.q3), CsvTable::cell(b.max)});
          cell.ok = true;
          nlohmann::json info = p.info;
          info["gamma"] = {{"min", b.min}, {"q1", b.q1}, {"median", b.median},
                           {"q3", b.q3}, {"max", b.max}};
          rec.cell(method_name(m), depth, seed, true, {}, info);
        } catch (const std::exception& e) {
          cell.error = e.what();
          rec.cell(method_name(m), depth, seed, false, cell.error, nlohmann::json::object());
        }
        out.cells.push_back(std::move(cell));
      }
    }
  }
  rec.table("boxplots", box);
  out.manifest = rec.finish();
  return out;
}

}  // namespace inbetween
