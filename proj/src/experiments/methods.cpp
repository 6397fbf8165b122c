#include "inbetween/experiments/methods.hpp"

#include <algorithm>
#include <stdexcept>

#include "inbetween/bnn/moments.hpp"

namespace inbetween {
namespace {

enum Purpose : std::uint64_t { kInit = 1, kTrain = 2, kPredict = 3, kChain = 4 };

// Distinct stream per (seed, method, purpose); cells never share noise.
std::uint64_t stream_id(Method m, Purpose p) {
  return 16 * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(p);
}

std::uint64_t train_seed(const CellSetup& s, Method m) {
  return s.seed * 1009 + stream_id(m, kTrain);
}

Prediction from_moments(const PredictiveMoments& pm) {
  Prediction p;
  p.mean.resize(pm.mean.rows());
  p.var.resize(pm.var.rows());
  for (std::size_t i = 0; i < p.mean.size(); ++i) {
    p.mean[i] = pm.mean(i, 0);
    p.var[i] = pm.var(i, 0);
  }
  return p;
}

}  // namespace

NngpKernelConfig CellSetup::kernel() const {
  return {spec.depth(), prior.sigma_w, prior.sigma_b, spec.input_dim};
}

ParamDist initial_dist(Method m, const CellSetup& setup) {
  RngStream rng(setup.seed, stream_id(m, kInit));
  switch (m) {
    case Method::kMfvi:
      return init_params(setup.spec, InitMethod::kMfviDefault, setup.prior, rng);
    case Method::kMcdo:
      return init_params(setup.spec, InitMethod::kMcdoDefault, setup.prior, rng, setup.dropout_p,
                         false);
    default:
      throw std::invalid_argument("initial_dist: not a variational method");
  }
}

ParamDist fit_variational(Method m, const CellSetup& setup, const Dataset& train,
                          std::vector<LossPoint>* trace) {
  ObjectiveSpec obj;
  obj.kind = m == Method::kMfvi ? ObjectiveKind::kElbo : ObjectiveKind::kMcdo;
  obj.data = train;
  obj.lik = setup.lik;
  obj.prior = setup.prior;
  obj.mc_samples = setup.scale.train_samples;
  TrainConfig cfg;
  cfg.iterations = setup.scale.train_iterations;
  cfg.adam.learning_rate = setup.scale.learning_rate;
  cfg.seed = train_seed(setup, m);
  cfg.log_every = std::max<std::size_t>(1, cfg.iterations / 100);
  return train_dist(initial_dist(m, setup), obj, cfg, trace);
}

Prediction predict_dist(const ParamDist& q, const CellSetup& setup, const Matrix& eval) {
  const Method m = std::holds_alternative<FFGParams>(q) ? Method::kMfvi : Method::kMcdo;
  const RngStream rng(setup.seed, stream_id(m, kPredict));
  return from_moments(predictive_mc(q, eval, setup.scale.predictive_samples, rng));
}

std::vector<Prediction> fit_predict_many(Method m, const CellSetup& setup, const Dataset& train,
                                         const std::vector<const Matrix*>& evals) {
  std::vector<Prediction> out;
  switch (m) {
    case Method::kGp: {
      const GPModel model = gp_fit(setup.kernel(), train, setup.lik.noise_std);
      for (const Matrix* x : evals) {
        Prediction p;
        for (const GaussianMoments& g : gp_predict(model, *x)) {
          p.mean.push_back(g.mean);
          p.var.push_back(g.variance);
        }
        p.info = {{"jitter", model.chol.jitter()}};
        out.push_back(std::move(p));
      }
      return out;
    }
    case Method::kMfvi:
    case Method::kMcdo: {
      std::vector<LossPoint> trace;
      const ParamDist q = fit_variational(m, setup, train, &trace);
      for (const Matrix* x : evals) {
        Prediction p = predict_dist(q, setup, *x);
        p.info = {{"final_loss", trace.empty() ? 0.0 : trace.back().loss},
                  {"iterations", setup.scale.train_iterations}};
        p.trace = trace;
        out.push_back(std::move(p));
      }
      return out;
    }
    case Method::kHmc: {
      const bool deep = setup.spec.depth() > 1;
      HmcConfig cfg;
      cfg.samples = deep ? setup.scale.hmc_samples_deep : setup.scale.hmc_samples;
      cfg.warmup = deep ? setup.scale.hmc_warmup_deep : setup.scale.hmc_warmup;
      cfg.leapfrog_steps = setup.scale.hmc_leapfrog;
      cfg.thin = std::max<std::size_t>(1, cfg.samples / std::max<std::size_t>(1, setup.scale.hmc_keep));
      RngStream rng(setup.seed, stream_id(m, kChain));
      const BnnHmcResult r = hmc_sample(setup.spec, setup.prior, train, setup.lik, cfg, rng);
      for (const Matrix* x : evals) {
        const PredictiveMoments pm = predictive_from_samples(r.samples, *x);
        Prediction p = from_moments(pm);
        p.info = {{"acceptance_rate", r.chain.acceptance_rate},
                  {"step_size", r.chain.step_size},
                  {"divergent", r.chain.divergent},
                  {"kept_samples", r.samples.size()},
                  {"split_rhat_log_density", split_rhat(r.chain.log_density)},
                  {"config", to_json(cfg)}};
        p.chain = r.chain.log_density;
        p.chain_thin = cfg.thin;
        out.push_back(std::move(p));
      }
      return out;
    }
  }
  throw std::invalid_argument("unknown method");
}

Prediction fit_predict(Method m, const CellSetup& setup, const Dataset& train,
                       const Matrix& eval) {
  return std::move(fit_predict_many(m, setup, train, {&eval}).front());
}

}  // namespace inbetween
