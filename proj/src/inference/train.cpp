#include "inbetween/inference/train.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace inbetween {

ValueAndGrad value_and_grad(const LossFn& loss, const std::vector<Matrix>& blocks,
                            const RngStream& rng) {
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  leaves.reserve(blocks.size());
  for (const auto& b : blocks) leaves.push_back(tape.leaf(b));
  RngStream stream = rng;
  const ad::Var out = loss(tape, leaves, stream);
  ValueAndGrad r{out.scalar(), {}};
  tape.backward(out);
  r.grads.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Matrix& g = leaves[i].grad();
    r.grads.push_back(g.empty() ? Matrix(blocks[i].rows(), blocks[i].cols()) : g);
  }
  return r;
}

void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw ShapeError("adam_step: block count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.rows(), p.cols());
      state.v.emplace_back(p.rows(), p.cols());
    }
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    require_same_shape(params[b], grads[b], "adam_step");
    Matrix& m = state.m[b];
    Matrix& v = state.v[b];
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double g = grads[b][i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      params[b][i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
}

TrainingDiverged::TrainingDiverged(std::size_t iteration, double loss,
                                   std::vector<LossPoint> trace)
    : std::runtime_error(fmt::format("training diverged at iteration {} (loss {})", iteration,
                                     loss)),
      iteration_(iteration),
      trace_(std::move(trace)) {}

TrainResult train(const LossFn& loss, std::vector<Matrix> init, const TrainConfig& cfg) {
  TrainResult result{std::move(init), {}};
  AdamState state;
  const RngStream base(cfg.seed, 0);
  const std::size_t every = cfg.log_every == 0 ? 1 : cfg.log_every;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const ValueAndGrad vg = value_and_grad(loss, result.blocks, base.split(it));
    if (it % every == 0) result.trace.push_back({it, vg.value});
    if (!std::isfinite(vg.value) || std::abs(vg.value) > kDivergenceThreshold) {
      if (result.trace.empty() || result.trace.back().iteration != it) {
        result.trace.push_back({it, vg.value});
      }
      throw TrainingDiverged(it, vg.value, std::move(result.trace));
    }
    adam_step(result.blocks, vg.grads, state, cfg.adam);
  }
  if (cfg.iterations > 0) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& b : result.blocks) leaves.push_back(tape.constant(b));
    RngStream stream = base.split(cfg.iterations);
    result.trace.push_back({cfg.iterations, loss(tape, leaves, stream).scalar()});
  }
  return result;
}

ParamDist train_dist(const ParamDist& init, const ObjectiveSpec& objective,
                     const TrainConfig& cfg, std::vector<LossPoint>* trace) {
  TrainResult r = train(make_loss(init, objective), param_blocks(init), cfg);
  if (trace != nullptr) *trace = std::move(r.trace);
  return with_blocks(init, std::move(r.blocks));
}

void write_trace_csv(const std::vector<LossPoint>& trace, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os << "iteration,loss\n";
  for (const auto& p : trace) os << fmt::format("{},{:.17g}\n", p.iteration, p.loss);
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"iterations", cfg.iterations},
          {"learning_rate", cfg.adam.learning_rate},
          {"beta1", cfg.adam.beta1},
          {"beta2", cfg.adam.beta2},
          {"eps", cfg.adam.eps},
          {"seed", cfg.seed},
          {"log_every", cfg.log_every}};
}

}  // namespace inbetween
