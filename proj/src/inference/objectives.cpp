#include "inbetween/inference/objectives.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace inbetween {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

std::size_t blocks_per_layer(const ParamDist& q) {
  return std::holds_alternative<FFGParams>(q) ? 4 : 2;
}

void require_blocks(const ParamDist& q, std::size_t n) {
  if (n != block_count(q)) {
    throw ShapeError(fmt::format("expected {} parameter blocks, got {}", block_count(q), n));
  }
}

void require_single_output(const NetworkSpec& spec) {
  if (spec.output_dim != 1) throw std::invalid_argument("objectives support one output");
}

Matrix normal_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = rng.normal();
  return m;
}

std::vector<ad::Var> as_constants(ad::Tape& tape, const ParamDist& q) {
  std::vector<ad::Var> vars;
  for (auto& b : param_blocks(q)) vars.push_back(tape.constant(std::move(b)));
  return vars;
}

ad::Var sum_sq(ad::Var a) { return ad::sum(ad::square(a)); }

ad::Var moment_match_graph(ad::Tape& tape, const ParamDist& structure,
                           std::span<const ad::Var> blocks, const Matrix& grid,
                           std::span<const double> target_mean,
                           std::span<const double> target_var, std::size_t samples,
                           RngStream& rng) {
  const std::size_t n = grid.rows();
  if (n == 0) throw std::invalid_argument("moment matching needs a nonempty grid");
  if (target_mean.size() != n || target_var.size() != n) {
    throw ShapeError("moment-matching targets do not match the grid");
  }
  if (samples < 2) throw std::invalid_argument("moment matching needs at least two samples");
  const ad::Var f = graph::sample_outputs(tape, structure, blocks, grid, samples, rng);
  const auto pm = graph::point_moments(f, samples, n);
  const ad::Var mu = tape.constant(Matrix::row_vector(target_mean));
  const ad::Var var = tape.constant(Matrix::row_vector(target_var));
  return ad::add(sum_sq(ad::sub(pm.mean, mu)), sum_sq(ad::sub(pm.var, var)));
}

ad::Var variational_graph(ad::Tape& tape, const ParamDist& structure,
                          std::span<const ad::Var> blocks, const ObjectiveSpec& spec,
                          RngStream& rng) {
  const ad::Var f =
      graph::sample_outputs(tape, structure, blocks, spec.data.x, spec.mc_samples, rng);
  const ad::Var nll = graph::gaussian_nll(tape, f, spec.data.y, spec.mc_samples, spec.lik);
  if (const auto* m = std::get_if<MCDOParams>(&structure)) {
    return ad::add(nll, graph::mcdo_penalty(tape, *m, blocks, spec.prior));
  }
  return ad::add(nll, graph::gaussian_kl(tape, spec_of(structure), blocks, spec.prior));
}

}  // namespace

double Likelihood::log_prob(double y, double f) const {
  const double z = (y - f) / noise_std;
  return -0.5 * z * z - std::log(noise_std) - kHalfLog2Pi;
}

std::size_t block_count(const ParamDist& q) {
  return blocks_per_layer(q) * spec_of(q).num_layers();
}

std::vector<Matrix> param_blocks(const ParamDist& q) {
  std::vector<Matrix> out;
  if (const auto* f = std::get_if<FFGParams>(&q)) {
    for (const auto& g : f->layers) {
      out.insert(out.end(), {g.w_mean, g.w_log_std, g.b_mean, g.b_log_std});
    }
  } else {
    for (const auto& d : std::get<MCDOParams>(q).layers) out.insert(out.end(), {d.w, d.b});
  }
  return out;
}

ParamDist with_blocks(const ParamDist& structure, std::vector<Matrix> blocks) {
  require_blocks(structure, blocks.size());
  if (const auto* f = std::get_if<FFGParams>(&structure)) {
    FFGParams q{f->spec, {}};
    for (std::size_t l = 0; l < f->layers.size(); ++l) {
      q.layers.push_back({std::move(blocks[4 * l]), std::move(blocks[4 * l + 1]),
                          std::move(blocks[4 * l + 2]), std::move(blocks[4 * l + 3])});
    }
    validate(q);
    return q;
  }
  const auto& m = std::get<MCDOParams>(structure);
  MCDOParams q{m.spec, {}, m.p, m.drop_inputs};
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    q.layers.push_back({std::move(blocks[2 * l]), std::move(blocks[2 * l + 1])});
  }
  validate(q);
  return q;
}

namespace graph {

ad::Var sample_outputs(ad::Tape& tape, const ParamDist& structure,
                       std::span<const ad::Var> blocks, const Matrix& x, std::size_t samples,
                       RngStream& rng) {
  require_blocks(structure, blocks.size());
  const NetworkSpec& spec = spec_of(structure);
  if (x.cols() != spec.input_dim) {
    throw ShapeError(fmt::format("inputs {} for input dim {}", x.shape_string(), spec.input_dim));
  }
  if (samples == 0) throw std::invalid_argument("need at least one sample");
  const std::size_t n = x.rows();
  const std::size_t layers = spec.num_layers();
  ad::Var h = tape.constant(x);
  bool tiled = false;

  if (std::holds_alternative<FFGParams>(structure)) {
    for (std::size_t l = 0; l < layers; ++l) {
      const ad::Var wm = blocks[4 * l];
      const ad::Var wls = blocks[4 * l + 1];
      const ad::Var bm = blocks[4 * l + 2];
      const ad::Var bls = blocks[4 * l + 3];
      ad::Var m = ad::add_row(ad::matmul(h, wm), bm);
      ad::Var v = ad::add_row(ad::matmul(ad::square(h), ad::exp(ad::scale(wls, 2.0))),
                              ad::exp(ad::scale(bls, 2.0)));
      if (!tiled) {
        m = ad::tile_rows(m, samples);
        v = ad::tile_rows(v, samples);
        tiled = true;
      }
      const ad::Var eps = tape.constant(normal_matrix(m.rows(), m.cols(), rng));
      const ad::Var z = ad::add(m, ad::mul(ad::sqrt(v), eps));
      h = l + 1 < layers ? ad::relu(z) : z;
    }
    return h;
  }

  const auto& mc = std::get<MCDOParams>(structure);
  const double keep = 1.0 - mc.p;
  for (std::size_t l = 0; l < layers; ++l) {
    if (l > 0 || mc.drop_inputs) {
      if (!tiled) {
        h = ad::tile_rows(h, samples);
        tiled = true;
      }
      const std::size_t width = h.cols();
      Matrix mask(samples * n, width);
      std::vector<double> eps(width);
      for (std::size_t s = 0; s < samples; ++s) {
        for (double& e : eps) e = rng.bernoulli(keep) ? 1.0 : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          std::copy(eps.begin(), eps.end(), mask.row(s * n + i).begin());
        }
      }
      h = ad::mul(h, tape.constant(std::move(mask)));
    }
    const ad::Var z = ad::add_row(ad::matmul(h, blocks[2 * l]), blocks[2 * l + 1]);
    h = l + 1 < layers ? ad::relu(z) : z;
  }
  return tiled ? h : ad::tile_rows(h, samples);
}

PointMoments point_moments(ad::Var stacked, std::size_t samples, std::size_t points) {
  if (stacked.cols() != 1 || stacked.rows() != samples * points) {
    throw ShapeError("point_moments expects a (samples * points) x 1 column");
  }
  const ad::Var r = ad::reshape(stacked, samples, points);
  const ad::Var mean = ad::col_mean(r);
  const ad::Var centred = ad::sub(r, ad::tile_rows(mean, samples));
  const double bessel =
      samples > 1 ? static_cast<double>(samples) / static_cast<double>(samples - 1) : 0.0;
  return {mean, ad::scale(ad::col_mean(ad::square(centred)), bessel)};
}

ad::Var gaussian_kl(ad::Tape& tape, const NetworkSpec& spec, std::span<const ad::Var> blocks,
                    const PriorConfig& prior) {
  if (blocks.size() != 4 * spec.num_layers()) throw ShapeError("KL needs FFG blocks");
  ad::Var total = tape.scalar_constant(0.0);
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t fan_in = blocks[4 * l].rows();
    const double s_w = prior.weight_std(fan_in);
    for (const auto& [mean, log_std, s] :
         {std::tuple{blocks[4 * l], blocks[4 * l + 1], s_w},
          std::tuple{blocks[4 * l + 2], blocks[4 * l + 3], prior.sigma_b}}) {
      // log(s / sigma) + (sigma^2 + mu^2) / (2 s^2) - 1/2, summed.
      const double count = static_cast<double>(mean.value().size());
      const ad::Var quad =
          ad::sum(ad::add(ad::exp(ad::scale(log_std, 2.0)), ad::square(mean)));
      ad::Var term = ad::sub(ad::scale(quad, 0.5 / (s * s)), ad::sum(log_std));
      term = ad::add_scalar(term, count * (std::log(s) - 0.5));
      total = ad::add(total, term);
    }
  }
  return total;
}

ad::Var gaussian_nll(ad::Tape& tape, ad::Var stacked, std::span<const double> y,
                     std::size_t samples, const Likelihood& lik) {
  const std::size_t n = y.size();
  if (stacked.cols() != 1 || stacked.rows() != samples * n) {
    throw ShapeError("gaussian_nll expects a (samples * N) x 1 column");
  }
  if (!(lik.noise_std > 0.0)) throw std::invalid_argument("noise std must be positive");
  if (n == 0) return tape.scalar_constant(0.0);
  Matrix targets(samples * n, 1);
  for (std::size_t s = 0; s < samples; ++s) std::copy(y.begin(), y.end(), targets.data() + s * n);
  const ad::Var sq = ad::sum(ad::square(ad::sub(stacked, tape.constant(std::move(targets)))));
  const double sigma2 = lik.noise_std * lik.noise_std;
  const ad::Var scaled = ad::scale(sq, 0.5 / (sigma2 * static_cast<double>(samples)));
  return ad::add_scalar(scaled,
                        static_cast<double>(n) * (std::log(lik.noise_std) + kHalfLog2Pi));
}

ad::Var mcdo_penalty(ad::Tape& tape, const MCDOParams& structure,
                     std::span<const ad::Var> blocks, const PriorConfig& prior) {
  if (blocks.size() != 2 * structure.spec.num_layers()) throw ShapeError("MCDO blocks");
  ad::Var total = tape.scalar_constant(0.0);
  const double keep = 1.0 - structure.p;
  for (std::size_t l = 0; l < structure.spec.num_layers(); ++l) {
    const double s = prior.weight_std(blocks[2 * l].rows());
    total = ad::add(total, ad::scale(sum_sq(blocks[2 * l]), keep / (2.0 * s * s)));
    total = ad::add(total, ad::scale(sum_sq(blocks[2 * l + 1]),
                                     1.0 / (2.0 * prior.sigma_b * prior.sigma_b)));
  }
  return total;
}

}  // namespace graph

LossFn make_loss(const ParamDist& structure, ObjectiveSpec spec) {
  require_single_output(spec_of(structure));
  spec.data.validate();
  const bool ffg = std::holds_alternative<FFGParams>(structure);
  if (spec.kind == ObjectiveKind::kElbo && !ffg) {
    throw std::invalid_argument("the ELBO objective needs an FFG distribution");
  }
  if (spec.kind == ObjectiveKind::kMcdo && ffg) {
    throw std::invalid_argument("the dropout objective needs an MCDO distribution");
  }
  if (spec.kind == ObjectiveKind::kInterpolated && !(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
    throw std::invalid_argument("interpolation weight outside [0, 1]");
  }
  return [structure, spec](ad::Tape& tape, std::span<const ad::Var> blocks,
                           RngStream& rng) -> ad::Var {
    switch (spec.kind) {
      case ObjectiveKind::kElbo:
      case ObjectiveKind::kMcdo:
        return variational_graph(tape, structure, blocks, spec, rng);
      case ObjectiveKind::kMomentMatch:
        return moment_match_graph(tape, structure, blocks, spec.grid, spec.target_mean,
                                  spec.target_var, spec.moment_samples, rng);
      case ObjectiveKind::kInterpolated: {
        const ad::Var l1 = moment_match_graph(tape, structure, blocks, spec.grid,
                                              spec.target_mean, spec.target_var,
                                              spec.moment_samples, rng);
        const ad::Var l2 = variational_graph(tape, structure, blocks, spec, rng);
        return ad::add(ad::scale(l1, spec.alpha), ad::scale(l2, 1.0 - spec.alpha));
      }
    }
    throw std::logic_error("unknown objective");
  };
}

double gaussian_kl(const FFGParams& q, const PriorConfig& prior) {
  validate(q);
  ad::Tape tape;
  const auto blocks = as_constants(tape, q);
  return graph::gaussian_kl(tape, q.spec, blocks, prior).scalar();
}

double elbo(const FFGParams& q, const Dataset& data, const Likelihood& lik,
            const PriorConfig& prior, std::size_t samples, RngStream& rng) {
  validate(q);
  data.validate();
  ad::Tape tape;
  const auto blocks = as_constants(tape, q);
  const ad::Var kl = graph::gaussian_kl(tape, q.spec, blocks, prior);
  if (data.size() == 0) return -kl.scalar();
  const ad::Var f = graph::sample_outputs(tape, q, blocks, data.x, samples, rng);
  return -graph::gaussian_nll(tape, f, data.y, samples, lik).scalar() - kl.scalar();
}

double mcdo_objective(const MCDOParams& q, const Dataset& data, const Likelihood& lik,
                      const PriorConfig& prior, std::size_t samples, RngStream& rng) {
  validate(q);
  data.validate();
  ad::Tape tape;
  const auto blocks = as_constants(tape, q);
  const double penalty = graph::mcdo_penalty(tape, q, blocks, prior).scalar();
  if (data.size() == 0) return penalty;
  const ad::Var f = graph::sample_outputs(tape, q, blocks, data.x, samples, rng);
  return graph::gaussian_nll(tape, f, data.y, samples, lik).scalar() + penalty;
}

double moment_match_loss(const ParamDist& q, const Matrix& grid,
                         std::span<const double> target_mean,
                         std::span<const double> target_var, std::size_t samples,
                         RngStream& rng) {
  require_single_output(spec_of(q));
  ad::Tape tape;
  const auto blocks = as_constants(tape, q);
  return moment_match_graph(tape, q, blocks, grid, target_mean, target_var, samples, rng)
      .scalar();
}

double interpolated_loss(double l1, double l2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("interpolation weight outside [0, 1]");
  }
  return alpha * l1 + (1.0 - alpha) * l2;
}

}  // namespace inbetween
