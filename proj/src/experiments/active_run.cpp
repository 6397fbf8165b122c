#include <algorithm>
#include <numeric>

#include "detail.hpp"
#include "inbetween/core/stats.hpp"

namespace inbetween {
namespace {

constexpr double kNoiseStd = 0.01;

std::vector<double> column0(const Matrix& m) {
  std::vector<double> v(m.rows());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m(i, 0);
  return v;
}

ActiveModelFn model_for(Method m, const ExperimentConfig& cfg, std::size_t dim, std::size_t depth,
                        std::uint64_t seed) {
  const PriorConfig prior{std::sqrt(2.0), 1.0};
  if (m == Method::kGp) {
    const NngpKernelConfig kernel{depth, prior.sigma_w, prior.sigma_b, dim};
    return [kernel](const Dataset& active, const Matrix& test_x, const Matrix& pool_x) {
      const GPModel gp = gp_fit(kernel, active, kNoiseStd);
      ModelOutputs out;
      for (const GaussianMoments& g : gp_predict(gp, test_x)) out.test_mean.push_back(g.mean);
      if (pool_x.rows() > 0) {
        for (const GaussianMoments& g : gp_predict(gp, pool_x)) out.pool_var.push_back(g.variance);
      }
      return out;
    };
  }
  ExperimentConfig local = cfg;
  local.scale.train_iterations = cfg.scale.al_iterations;
  // Each refit starts from a fresh initialisation keyed by the active-set size.
  return [m, local, dim, depth, seed, prior](const Dataset& active, const Matrix& test_x,
                                             const Matrix& pool_x) {
    const CellSetup setup =
        detail::cell_setup(local, dim, depth, prior, kNoiseStd, seed * 100003 + active.size());
    const ParamDist q = fit_variational(m, setup, active);
    const RngStream rng(setup.seed, 77);
    ModelOutputs out;
    out.test_mean = column0(predictive_mc(q, test_x, local.scale.predictive_samples, rng).mean);
    if (pool_x.rows() > 0) {
      out.pool_var = column0(predictive_mc(q, pool_x, local.scale.predictive_samples, rng).var);
    }
    return out;
  };
}

}  // namespace

const ActiveSummaryRow* ActiveResult::row(Method m, std::size_t depth, Acquisition a) const {
  for (const ActiveSummaryRow& r : table) {
    if (r.method == m && r.depth == depth && r.mode == a) return &r;
  }
  return nullptr;
}

ActiveResult run_active_learning(const ExperimentConfig& cfg, const Dataset& full) {
  full.validate();
  const ScaleConfig& sc = cfg.scale;
  nlohmann::json config = to_json(cfg);
  config["noise_std"] = kNoiseStd;
  config["prior"] = {{"sigma_w", std::sqrt(2.0)}, {"sigma_b", 1.0}};
  config["rows"] = full.size();

  // Fixed subsample shared by every seed.
  Dataset data = full;
  if (sc.al_subsample > 0 && sc.al_subsample < full.size()) {
    std::vector<std::size_t> order(full.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(0, 4242);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    order.resize(sc.al_subsample);
    std::sort(order.begin(), order.end());
    data = full.subset(order);
    config["subsample"] = sc.al_subsample;
  }
  RunRecorder rec(cfg.outdir, "active", config);
  ActiveResult out;

  for (std::uint64_t s = 0; s < sc.al_seeds; ++s) {
    const ActiveSplit split = make_active_split(data.size(), sc.al_test_fraction, sc.al_initial, s);
    const Dataset train = data.subset(split.train);
    const Dataset test = data.subset(split.test);
    for (Method m : cfg.methods) {
      if (m == Method::kHmc) continue;
      for (std::size_t depth : cfg.depths) {
        ActiveCell cell{.method = m, .depth = depth, .seed = s};
        try {
          const ActiveModelFn model = model_for(m, cfg, data.dim(), depth, s);
          RngStream rng_a(s, 501);
          RngStream rng_r(s, 502);
          const ActiveLearningState a = run_active_loop(train, test, split.initial,
                                                        sc.al_acquisitions, Acquisition::kActive,
                                                        model, rng_a);
          const ActiveLearningState r = run_active_loop(train, test, split.initial,
                                                        sc.al_acquisitions, Acquisition::kRandom,
                                                        model, rng_r);
          cell.rmse_active = a.rmse();
          cell.rmse_random = r.rmse();
          // Report rows of the (subsampled) dataset, not train positions.
          for (std::size_t i : a.acquired()) cell.acquired_active.push_back(split.train[i]);
          for (std::size_t i : r.acquired()) cell.acquired_random.push_back(split.train[i]);
          for (std::size_t i : split.initial) cell.initial.push_back(split.train[i]);

          CsvTable t({"iteration", "active_size", "rmse_active", "rmse_random", "acquired_active",
                      "acquired_random"});
          for (std::size_t it = 0; it < cell.rmse_active.size(); ++it) {
            const double acq_a = it == 0 ? -1.0 : static_cast<double>(cell.acquired_active[it - 1]);
            const double acq_r = it == 0 ? -1.0 : static_cast<double>(cell.acquired_random[it - 1]);
            t.add_row({static_cast<double>(it), static_cast<double>(sc.al_initial + it),
                       cell.rmse_active[it], cell.rmse_random[it], acq_a, acq_r});
          }
          rec.table(cell_stem(method_name(m), depth, s), t);
          cell.ok = true;
          rec.cell(method_name(m), depth, s, true, {},
                   {{"initial", cell.initial},
                    {"final_rmse_active", cell.rmse_active.back()},
                    {"final_rmse_random", cell.rmse_random.back()}});
        } catch (const std::exception& e) {
          cell.error = e.what();
          rec.cell(method_name(m), depth, s, false, cell.error, nlohmann::json::object());
        }
        out.cells.push_back(std::move(cell));
      }
    }
  }

  CsvTable table({"method", "depth", "mode", "mean_rmse", "se_rmse", "seeds"});
  for (Method m : cfg.methods) {
    if (m == Method::kHmc) continue;
    for (std::size_t depth : cfg.depths) {
      for (Acquisition mode : {Acquisition::kActive, Acquisition::kRandom}) {
        std::vector<double> finals;
        for (const ActiveCell& c : out.cells) {
          if (c.ok && c.method == m && c.depth == depth) {
            finals.push_back(mode == Acquisition::kActive ? c.rmse_active.back()
                                                          : c.rmse_random.back());
          }
        }
        if (finals.empty()) continue;
        ActiveSummaryRow row{m, depth, mode, mean_of(finals), 0.0, finals.size()};
        if (finals.size() > 1) {
          row.se_rmse = std::sqrt(variance_of(finals) / static_cast<double>(finals.size()));
        }
        table.add_text_row({std::string(method_name(m)), std::to_string(depth),
                            mode == Acquisition::kActive ? "active" : "random",
                            CsvTable::cell(row.mean_rmse), CsvTable::cell(row.se_rmse),
                            std::to_string(row.seeds)});
        out.table.push_back(row);
      }
    }
  }
  rec.table("table1", table);
  out.manifest = rec.finish();
  return out;
}

}  // namespace inbetween
