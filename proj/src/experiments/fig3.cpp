#include <limits>

#include "detail.hpp"
#include "inbetween/experiments/datasets.hpp"

namespace inbetween {
namespace {

constexpr double kSliceEnd = 1.2;
constexpr double kHeatmapEnd = 2.0;

Matrix heatmap_inputs(std::size_t side) {
  const std::vector<double> axis = linspace(-kHeatmapEnd, kHeatmapEnd, side);
  Matrix x(side * side, 2);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      x(i * side + j, 0) = axis[j];
      x(i * side + j, 1) = axis[i];
    }
  }
  return x;
}

SliceSummary summarise(const std::vector<double>& lambdas, const Prediction& p,
                       const Prediction* gp) {
  const std::size_t mid = detail::nearest(lambdas, 0.0);
  const std::size_t lo = detail::nearest(lambdas, -1.0);
  const std::size_t hi = detail::nearest(lambdas, 1.0);
  SliceSummary s;
  s.std_mid = detail::std_of(p.var[mid]);
  s.std_clusters = 0.5 * (detail::std_of(p.var[lo]) + detail::std_of(p.var[hi]));
  s.gamma_mid = gp != nullptr && gp->var[mid] > 0.0 && p.var[mid] > 0.0
                    ? std::sqrt(gp->var[mid] / p.var[mid])
                    : std::numeric_limits<double>::quiet_NaN();
  return s;
}

}  // namespace

const Fig3Cell* Fig3Result::find(Method m, std::size_t depth, std::uint64_t seed) const {
  for (const Fig3Cell& c : cells) {
    if (c.method == m && c.depth == depth && c.seed == seed) return &c;
  }
  return nullptr;
}

Fig3Result run_fig3(const ExperimentConfig& cfg) {
  nlohmann::json config = to_json(cfg);
  const TwoClusterConfig data_cfg;
  config["data"] = to_json(data_cfg);
  config["slice"] = {{"from", {-kSliceEnd, -kSliceEnd}},
                     {"to", {kSliceEnd, kSliceEnd}},
                     {"points", cfg.scale.slice_points}};
  config["heatmap"] = {{"lo", -kHeatmapEnd}, {"hi", kHeatmapEnd}, {"side", cfg.scale.heatmap_side}};
  RunRecorder rec(cfg.outdir, "fig3", config);
  Fig3Result out;

  const std::vector<double> lambdas = linspace(-kSliceEnd, kSliceEnd, cfg.scale.slice_points);
  const Matrix slice = diagonal_slice(lambdas);
  const Matrix heat = heatmap_inputs(cfg.scale.heatmap_side);

  for (std::size_t depth : cfg.depths) {
    for (std::uint64_t seed : cfg.scale.seeds) {
      const Dataset data = gen_two_cluster_2d(seed, depth, data_cfg);
      rec.table(cell_stem("data", depth, seed), detail::data_table(data));
      const CellSetup setup =
          detail::cell_setup(cfg, 2, depth, two_cluster_prior(cfg, depth), data_cfg.noise_std, seed);

      // The GP is the reference for gamma, so it is always fitted first.
      std::optional<Prediction> gp_slice;
      try {
        gp_slice = fit_predict(Method::kGp, setup, data, slice);
      } catch (const std::exception&) {
        gp_slice.reset();
      }

      for (Method m : cfg.methods) {
        Fig3Cell cell{.method = m, .depth = depth, .seed = seed};
        if (m == Method::kHmc && depth > 2) continue;
        try {
          std::vector<Prediction> preds = fit_predict_many(m, setup, data, {&slice, &heat});
          const Prediction& ps = preds[0];
          const Prediction& ph = preds[1];
          const Prediction* ref = gp_slice ? &*gp_slice : nullptr;
          cell.slice = summarise(lambdas, ps, ref);
          cell.info = ps.info;

          CsvTable st({"lambda", "x0", "x1", "mean", "std", "gamma"});
          const std::vector<double> gamma =
              ref != nullptr ? detail::gamma_curve(ref->var, ps.var)
                             : std::vector<double>(lambdas.size(),
                                                   std::numeric_limits<double>::quiet_NaN());
          for (std::size_t i = 0; i < lambdas.size(); ++i) {
            st.add_row({lambdas[i], slice(i, 0), slice(i, 1), ps.mean[i],
                        detail::std_of(ps.var[i]), gamma[i]});
          }
          rec.table(cell_stem(method_name(m), depth, seed), st);

          CsvTable gt({"x0", "x1", "mean", "std"});
          for (std::size_t i = 0; i < heat.rows(); ++i) {
            gt.add_row({heat(i, 0), heat(i, 1), ph.mean[i], detail::std_of(ph.var[i])});
          }
          rec.table(cell_stem(method_name(m), depth, seed, "grid"), gt);
          detail::write_fit_logs(rec, m, depth, seed, ps);
          cell.ok = true;
          nlohmann::json info = cell.info;
          info["std_mid"] = cell.slice.std_mid;
          info["std_clusters"] = cell.slice.std_clusters;
          info["gamma_mid"] = cell.slice.gamma_mid;
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
