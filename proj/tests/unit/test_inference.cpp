#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "inbetween/bnn/moments.hpp"
#include "inbetween/core/stats.hpp"
#include "inbetween/inference/hmc.hpp"
#include "inbetween/inference/train.hpp"
#include "support/fd_check.hpp"

namespace inbetween {
namespace {

using testing::fd_check;

Dataset toy_data(std::size_t n, std::size_t d, RngStream& rng) {
  Dataset data{Matrix(n, d), std::vector<double>(n), {}};
  for (double& v : data.x.flat()) v = rng.normal();
  for (std::size_t i = 0; i < n; ++i) data.y[i] = std::sin(data.x(i, 0)) + 0.1 * rng.normal();
  return data;
}

FFGParams random_ffg(const NetworkSpec& spec, RngStream& rng) {
  FFGParams q = zero_ffg(spec, 1.0);
  for (auto& g : q.layers) {
    for (double& v : g.w_mean.flat()) v = rng.normal();
    for (double& v : g.b_mean.flat()) v = 0.5 * rng.normal();
    for (double& v : g.w_log_std.flat()) v = -1.5 + 0.3 * rng.normal();
    for (double& v : g.b_log_std.flat()) v = -1.5 + 0.3 * rng.normal();
  }
  return q;
}

MCDOParams random_mcdo(const NetworkSpec& spec, double p, bool drop_inputs, RngStream& rng) {
  MCDOParams q{spec, zero_params(spec).layers, p, drop_inputs};
  for (auto& l : q.layers) {
    for (double& v : l.w.flat()) v = rng.normal();
    for (double& v : l.b.flat()) v = 0.5 * rng.normal();
  }
  return q;
}

// ---------------------------------------------------------------- autodiff

using UnaryBuilder = std::function<ad::Var(ad::Var)>;

double fd_unary(const UnaryBuilder& op, const Matrix& x0, const Matrix& weights) {
  RngStream pick(1);
  const LossFn loss = [&](ad::Tape& t, std::span<const ad::Var> v, RngStream&) {
    return ad::sum(ad::mul(op(v[0]), t.constant(weights)));
  };
  return fd_check(loss, {x0}, RngStream(0), 12, pick).max_rel_error;
}

TEST(Autodiff, UnaryOpsMatchFiniteDifferences) {
  RngStream rng(1);
  Matrix x(3, 4);
  for (double& v : x.flat()) v = 0.5 + std::abs(rng.normal());  // positive for sqrt/log
  Matrix w(3, 4);
  for (double& v : w.flat()) v = rng.normal();
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::exp(a); }, x, w), 1e-7);
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::log(a); }, x, w), 1e-7);
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::sqrt(a); }, x, w), 1e-7);
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::square(a); }, x, w), 1e-7);
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::scale(a, -2.5); }, x, w), 1e-7);
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::add_scalar(a, 3.0); }, x, w), 1e-7);
  Matrix xs = x;
  for (double& v : xs.flat()) v -= 1.3;  // both signs for relu
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::relu(a); }, xs, w), 1e-7);
}

TEST(Autodiff, StructuralOpsMatchFiniteDifferences) {
  RngStream rng(2);
  Matrix x(4, 3);
  for (double& v : x.flat()) v = rng.normal();
  Matrix w12(12, 3);
  for (double& v : w12.flat()) v = rng.normal();
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::tile_rows(a, 3); }, x, w12), 1e-7);
  Matrix w26(2, 6);
  for (double& v : w26.flat()) v = rng.normal();
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::reshape(a, 2, 6); }, x, w26), 1e-7);
  Matrix w13(1, 3);
  for (double& v : w13.flat()) v = rng.normal();
  EXPECT_LT(fd_unary([](ad::Var a) { return ad::col_mean(a); }, x, w13), 1e-7);
}

TEST(Autodiff, BinaryOpsMatchFiniteDifferences) {
  RngStream rng(3);
  auto rnd = [&](std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& v : m.flat()) v = rng.normal();
    return m;
  };
  const Matrix a = rnd(4, 3);
  const Matrix b = rnd(4, 3);
  const Matrix c = rnd(3, 5);
  const Matrix row = rnd(1, 3);
  const Matrix w43 = rnd(4, 3);
  const Matrix w45 = rnd(4, 5);
  using Bin = std::function<ad::Var(ad::Var, ad::Var)>;
  auto check = [&](const Bin& op, const Matrix& x, const Matrix& y, const Matrix& weights) {
    RngStream pick(9);
    const LossFn loss = [&](ad::Tape& t, std::span<const ad::Var> v, RngStream&) {
      return ad::sum(ad::mul(op(v[0], v[1]), t.constant(weights)));
    };
    return fd_check(loss, {x, y}, RngStream(0), 20, pick).max_rel_error;
  };
  EXPECT_LT(check([](ad::Var p, ad::Var q) { return p + q; }, a, b, w43), 1e-7);
  EXPECT_LT(check([](ad::Var p, ad::Var q) { return p - q; }, a, b, w43), 1e-7);
  EXPECT_LT(check([](ad::Var p, ad::Var q) { return p * q; }, a, b, w43), 1e-7);
  EXPECT_LT(check([](ad::Var p, ad::Var q) { return ad::matmul(p, q); }, a, c, w45), 1e-7);
  EXPECT_LT(check([](ad::Var p, ad::Var q) { return ad::add_row(p, q); }, a, row, w43), 1e-7);
  EXPECT_LT(check([](ad::Var p, ad::Var q) { return ad::mul_row(p, q); }, a, row, w43), 1e-7);
}

TEST(Autodiff, ConstantAndLinearObjectives) {
  const Matrix theta = Matrix::from_rows({{1.0, -2.0, 3.0}});
  const LossFn constant = [](ad::Tape& t, std::span<const ad::Var>, RngStream&) {
    return t.scalar_constant(4.0);
  };
  const auto vg = value_and_grad(constant, {theta}, RngStream(0));
  EXPECT_EQ(vg.value, 4.0);
  for (double g : vg.grads[0].flat()) EXPECT_EQ(g, 0.0);
  const Matrix c = Matrix::from_rows({{0.5, 7.0, -1.0}});
  const LossFn linear = [&](ad::Tape& t, std::span<const ad::Var> v, RngStream&) {
    return ad::sum(ad::mul(v[0], t.constant(c)));
  };
  EXPECT_EQ(value_and_grad(linear, {theta}, RngStream(0)).grads[0], c);
}

TEST(Autodiff, SharedSubexpressionAccumulates) {
  // f = sum(x * x + x) -> df/dx = 2x + 1
  const LossFn f = [](ad::Tape&, std::span<const ad::Var> v, RngStream&) {
    return ad::sum(ad::add(ad::mul(v[0], v[0]), v[0]));
  };
  const auto vg = value_and_grad(f, {Matrix::from_rows({{1.5, -2.0}})}, RngStream(0));
  EXPECT_DOUBLE_EQ(vg.grads[0](0, 0), 4.0);
  EXPECT_DOUBLE_EQ(vg.grads[0](0, 1), -3.0);
}

// --------------------------------------------------------------- objectives

// 1D quadrature of KL(N(m, s^2) || N(0, p^2)) on +-12 sd with Simpson's rule.
double kl_quadrature(double m, double s, double p) {
  const int n = 4000;
  const double lo = m - 12 * s;
  const double hi = m + 12 * s;
  const double h = (hi - lo) / n;
  auto f = [&](double x) {
    const double lq = -0.5 * std::pow((x - m) / s, 2) - std::log(s);
    const double lp = -0.5 * std::pow(x / p, 2) - std::log(p);
    return std::exp(lq) / std::sqrt(2 * std::numbers::pi) * (lq - lp);
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

TEST(Kl, PriorGivesZeroAndSingleWeightCase) {
  const PriorConfig prior{1.3, 0.7};
  const NetworkSpec spec{2, {5}, 1};
  EXPECT_NEAR(gaussian_kl(prior_ffg(spec, prior), prior), 0.0, 1e-12);
  // One weight with fan-in 1 and sigma_w = 1: prior std 1; mu = 1, sigma = 1.
  FFGParams q = prior_ffg(NetworkSpec{1, {1}, 1}, {1.0, 1.0});
  q.layers[0].w_mean(0, 0) = 1.0;
  EXPECT_NEAR(gaussian_kl(q, {1.0, 1.0}), 0.5, 1e-12);
}

TEST(Kl, MatchesQuadratureOracleAndIsNonNegative) {
  RngStream rng(4);
  const PriorConfig prior{2.0, 1.0};
  const NetworkSpec spec{3, {4}, 1};
  for (int t = 0; t < 5; ++t) {
    const FFGParams q = random_ffg(spec, rng);
    double oracle = 0.0;
    for (const auto& g : q.layers) {
      const double pw = prior.weight_std(g.w_mean.rows());
      for (std::size_t i = 0; i < g.w_mean.size(); ++i) {
        oracle += kl_quadrature(g.w_mean[i], std::exp(g.w_log_std[i]), pw);
      }
      for (std::size_t i = 0; i < g.b_mean.size(); ++i) {
        oracle += kl_quadrature(g.b_mean[i], std::exp(g.b_log_std[i]), prior.sigma_b);
      }
    }
    const double kl = gaussian_kl(q, prior);
    EXPECT_NEAR(kl, oracle, 1e-6);
    EXPECT_GT(kl, 0.0);
  }
}

TEST(Elbo, EmptyDatasetIsNegativeKl) {
  RngStream rng(5);
  const FFGParams q = random_ffg(NetworkSpec{2, {4}, 1}, rng);
  const PriorConfig prior{1.0, 1.0};
  const Dataset empty{Matrix(0, 2), {}, {}};
  EXPECT_DOUBLE_EQ(elbo(q, empty, {0.1}, prior, 8, rng), -gaussian_kl(q, prior));
}

TEST(Elbo, DegenerateQGivesLogLikelihoodMinusKl) {
  RngStream rng(6);
  FFGParams q = random_ffg(NetworkSpec{2, {4}, 1}, rng);
  for (auto& g : q.layers) {
    g.w_log_std.fill(-40.0);
    g.b_log_std.fill(-40.0);
  }
  const Dataset data = toy_data(6, 2, rng);
  const Likelihood lik{0.3};
  const PriorConfig prior{1.0, 1.0};
  const Matrix f = forward(ffg_means(q), data.x);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) ll += lik.log_prob(data.y[i], f[i]);
  EXPECT_NEAR(elbo(q, data, lik, prior, 4, rng), ll - gaussian_kl(q, prior), 1e-9);
}

TEST(Elbo, EstimatorMeanMatchesHighSampleEstimate) {
  RngStream rng(7);
  const FFGParams q = random_ffg(NetworkSpec{1, {5}, 1}, rng);
  const Dataset data = toy_data(4, 1, rng);
  const Likelihood lik{0.5};
  const PriorConfig prior{1.0, 1.0};
  RunningMoments s1;
  for (int r = 0; r < 1000; ++r) {
    RngStream a = rng.split(r);
    s1.add(elbo(q, data, lik, prior, 1, a));
  }
  RngStream big = rng.split(5000);
  const double reference = elbo(q, data, lik, prior, 100000, big);
  EXPECT_LT(std::abs(s1.mean() - reference), 4 * s1.mean_se());
}

TEST(McdoObjective, PenaltyAndDeterministicLimit) {
  const NetworkSpec spec{2, {3}, 1};
  const PriorConfig prior{2.0, 0.5};
  const MCDOParams zero{spec, zero_params(spec).layers, 0.2, false};
  const Dataset empty{Matrix(0, 2), {}, {}};
  RngStream rng(8);
  EXPECT_EQ(mcdo_objective(zero, empty, {0.1}, prior, 4, rng), 0.0);

  const MCDOParams q = random_mcdo(spec, 0.2, false, rng);
  double expected = 0.0;
  for (const auto& l : q.layers) {
    const double s2 = 4.0 / static_cast<double>(l.w.rows());
    double ww = 0.0;
    for (double v : l.w.flat()) ww += v * v;
    double bb = 0.0;
    for (double v : l.b.flat()) bb += v * v;
    expected += 0.8 / (2.0 * s2) * ww + bb / (2.0 * 0.25);
  }
  EXPECT_NEAR(mcdo_objective(q, empty, {0.1}, prior, 4, rng), expected, 1e-12);

  MCDOParams det = q;
  det.p = 1e-300;
  const Dataset data = toy_data(5, 2, rng);
  const Likelihood lik{0.2};
  const Matrix f = forward(NetworkParams{spec, det.layers}, data.x);
  double nll = 0.0;
  for (std::size_t i = 0; i < 5; ++i) nll -= lik.log_prob(data.y[i], f[i]);
  double penalty = 0.0;
  for (const auto& l : det.layers) {
    double ww = 0.0;
    for (double v : l.w.flat()) ww += v * v;
    double bb = 0.0;
    for (double v : l.b.flat()) bb += v * v;
    penalty += ww / (2.0 * 4.0 / static_cast<double>(l.w.rows())) + bb / 0.5;
  }
  EXPECT_NEAR(mcdo_objective(det, data, lik, prior, 1, rng), nll + penalty, 1e-9);
}

TEST(MomentMatch, OnePointGridMatchesClosedForm) {
  RngStream rng(9);
  const MCDOParams q = random_mcdo(NetworkSpec{1, {20}, 1}, 0.3, false, rng);
  const std::vector<double> x{0.4};
  const auto cf = closed_form_1hl_moments_mcdo(q, x)[0];
  const Matrix grid = Matrix::row_vector(x);
  // Targets offset from the truth by known amounts: loss -> 0.5^2 + 0.25^2.
  const std::vector<double> mu{cf.mean + 0.5};
  const std::vector<double> var{cf.variance - 0.25};
  RunningMoments acc;
  for (int r = 0; r < 200; ++r) {
    RngStream s = rng.split(r);
    acc.add(moment_match_loss(q, grid, mu, var, 2000, s));
  }
  EXPECT_LT(std::abs(acc.mean() - (0.25 + 0.0625)), 4 * acc.mean_se() + 0.01);
  EXPECT_THROW(moment_match_loss(q, Matrix(0, 1), {}, {}, 10, rng), std::invalid_argument);
}

TEST(Interpolated, Arithmetic) {
  EXPECT_EQ(interpolated_loss(2.0, 5.0, 1.0), 2.0);
  EXPECT_EQ(interpolated_loss(2.0, 5.0, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(interpolated_loss(2.0, 5.0, 0.9), 0.9 * 2.0 + 0.1 * 5.0);
  EXPECT_THROW(interpolated_loss(1, 1, 1.5), std::invalid_argument);
}

ObjectiveSpec objective_for(ObjectiveKind kind, RngStream& rng) {
  ObjectiveSpec spec;
  spec.kind = kind;
  spec.data = toy_data(5, 2, rng);
  spec.lik = {0.3};
  spec.prior = {1.5, 1.0};
  spec.mc_samples = 4;
  spec.grid = Matrix(6, 2);
  for (double& v : spec.grid.flat()) v = rng.normal();
  spec.target_mean.assign(6, 0.2);
  spec.target_var.assign(6, 0.5);
  spec.moment_samples = 8;
  spec.alpha = 0.6;
  return spec;
}

TEST(Gradients, EveryObjectiveMatchesFiniteDifferences) {
  RngStream rng(10);
  const NetworkSpec spec{2, {5, 4}, 1};
  const ParamDist ffg = random_ffg(spec, rng);
  const ParamDist mcdo = random_mcdo(spec, 0.25, false, rng);
  const ParamDist mcdo_in = random_mcdo(spec, 0.25, true, rng);
  struct Case {
    const char* name;
    const ParamDist* dist;
    ObjectiveKind kind;
  };
  const Case cases[] = {
      {"elbo", &ffg, ObjectiveKind::kElbo},
      {"mcdo", &mcdo, ObjectiveKind::kMcdo},
      {"mcdo-inputs", &mcdo_in, ObjectiveKind::kMcdo},
      {"moment-ffg", &ffg, ObjectiveKind::kMomentMatch},
      {"moment-mcdo", &mcdo, ObjectiveKind::kMomentMatch},
      {"interp-ffg", &ffg, ObjectiveKind::kInterpolated},
      {"interp-mcdo", &mcdo, ObjectiveKind::kInterpolated},
  };
  for (const auto& c : cases) {
    const LossFn loss = make_loss(*c.dist, objective_for(c.kind, rng));
    RngStream pick(11);
    const auto r = fd_check(loss, param_blocks(*c.dist), RngStream(12, 3), 20, pick);
    EXPECT_LT(r.max_rel_error, 1e-4) << c.name;
  }
}

TEST(Objectives, FamilyMismatchThrows) {
  RngStream rng(13);
  const NetworkSpec spec{2, {3}, 1};
  EXPECT_THROW(make_loss(random_mcdo(spec, 0.1, false, rng), objective_for(ObjectiveKind::kElbo, rng)),
               std::invalid_argument);
  EXPECT_THROW(make_loss(random_ffg(spec, rng), objective_for(ObjectiveKind::kMcdo, rng)),
               std::invalid_argument);
}

// --------------------------------------------------------------- optimiser

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  std::vector<Matrix> p{Matrix::from_rows({{1.0, -2.0}})};
  const std::vector<Matrix> g{Matrix(1, 2)};
  AdamState s;
  adam_step(p, g, s, {});
  EXPECT_EQ(p[0], Matrix::from_rows({{1.0, -2.0}}));
}

TEST(Adam, FirstStepIsLearningRateRegardlessOfScale) {
  for (double scale : {1e-6, 1.0, 1e6}) {
    std::vector<Matrix> p{Matrix(1, 1, 0.0)};
    AdamState s;
    adam_step(p, {Matrix(1, 1, scale)}, s, {});
    EXPECT_NEAR(p[0][0], -1e-3, 1e-9 + 1e-3 * 1e-8 / scale);
  }
}

TEST(Adam, MinimisesQuadratic) {
  const LossFn f = [](ad::Tape&, std::span<const ad::Var> v, RngStream&) {
    return ad::sum(ad::square(v[0]));
  };
  TrainConfig cfg;
  cfg.iterations = 5000;
  const auto r = train(f, {Matrix(1, 1, 1.0)}, cfg);
  EXPECT_LT(std::abs(r.blocks[0][0]), 1e-3);
}

TEST(Train, ZeroIterationsReturnsInit) {
  RngStream rng(14);
  const ParamDist q = random_ffg(NetworkSpec{2, {3}, 1}, rng);
  TrainConfig cfg;
  cfg.iterations = 0;
  std::vector<LossPoint> trace;
  const ParamDist out = train_dist(q, objective_for(ObjectiveKind::kElbo, rng), cfg, &trace);
  EXPECT_EQ(std::get<FFGParams>(out).layers[0].w_mean, std::get<FFGParams>(q).layers[0].w_mean);
  EXPECT_TRUE(trace.empty());
}

TEST(Train, ElboImprovesOnTwoPointsAndIsReproducible) {
  RngStream rng(15);
  RngStream init_rng(16);
  const ParamDist q = init_mfvi(NetworkSpec{1, {10}, 1}, init_rng);
  ObjectiveSpec obj;
  obj.kind = ObjectiveKind::kElbo;
  obj.data = Dataset{Matrix::column_vector(std::vector<double>{-1.0, 1.0}), {0.5, -0.5}, {}};
  obj.lik = {0.1};
  obj.prior = {1.0, 1.0};
  obj.mc_samples = 8;
  TrainConfig cfg;
  cfg.iterations = 2000;
  cfg.adam.learning_rate = 1e-2;
  cfg.log_every = 100;
  std::vector<LossPoint> t1;
  std::vector<LossPoint> t2;
  const ParamDist a = train_dist(q, obj, cfg, &t1);
  const ParamDist b = train_dist(q, obj, cfg, &t2);
  EXPECT_LT(t1.back().loss, t1.front().loss);
  ASSERT_EQ(t1.size(), t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i) EXPECT_EQ(t1[i].loss, t2[i].loss);
  EXPECT_EQ(std::get<FFGParams>(a).layers[1].w_mean, std::get<FFGParams>(b).layers[1].w_mean);
}

TEST(Train, DivergenceAbortsWithTrace) {
  const LossFn f = [](ad::Tape&, std::span<const ad::Var> v, RngStream&) {
    return ad::sum(ad::exp(ad::scale(v[0], -1.0)));
  };
  TrainConfig cfg;
  cfg.iterations = 100;
  cfg.log_every = 1;
  try {
    train(f, {Matrix(1, 1, -30.0)}, cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.iteration(), 0u);
    EXPECT_FALSE(e.trace().empty());
  }
}

// -------------------------------------------------------------------- HMC

TEST(Hmc, StandardNormalTarget) {
  const LogDensityFn target = [](std::span<const double> q, std::span<double> g) {
    double lp = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      lp -= 0.5 * q[i] * q[i];
      g[i] = -q[i];
    }
    return lp;
  };
  HmcConfig cfg;
  cfg.step_size = 0.5;
  cfg.leapfrog_steps = 3;
  cfg.warmup = 500;
  cfg.samples = 100000;
  RngStream rng(17);
  const HmcChain chain = hmc_sample(target, {3.0, -3.0}, cfg, rng);
  EXPECT_GT(chain.acceptance_rate, 0.5);
  for (std::size_t d = 0; d < 2; ++d) {
    std::vector<double> xs;
    for (const auto& s : chain.samples) xs.push_back(s[d]);
    // Autocorrelated draws: use batch means for the standard error.
    RunningMoments batches;
    const std::size_t b = 1000;
    for (std::size_t i = 0; i + b <= xs.size(); i += b) {
      batches.add(mean_of(std::span<const double>(xs).subspan(i, b)));
    }
    EXPECT_LT(std::abs(mean_of(xs)), 4 * batches.mean_se());
    RunningMoments sq_batches;
    for (std::size_t i = 0; i + b <= xs.size(); i += b) {
      double s = 0;
      for (std::size_t j = i; j < i + b; ++j) s += xs[j] * xs[j];
      sq_batches.add(s / b);
    }
    EXPECT_LT(std::abs(sq_batches.mean() - 1.0), 4 * sq_batches.mean_se());
    // Chi-squared goodness of fit on 10 equiprobable bins.
    std::vector<int> counts(10, 0);
    for (double x : xs) {
      int k = static_cast<int>(std_normal_cdf(x) * 10);
      ++counts[std::min(k, 9)];
    }
    // Thin by 10 to reduce autocorrelation before the test.
    std::vector<int> thin(10, 0);
    for (std::size_t i = 0; i < xs.size(); i += 10) {
      ++thin[std::min(static_cast<int>(std_normal_cdf(xs[i]) * 10), 9)];
    }
    const double expected = static_cast<double>(xs.size() / 10) / 10.0;
    double chi2 = 0.0;
    for (int c : thin) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 21.67);  // chi2(9) 0.99 quantile
  }
}

TEST(Hmc, ConjugateLinearRegressionPosterior) {
  // y = w x + noise, w ~ N(0, s0^2): posterior N(m, v) in closed form.
  RngStream rng(18);
  std::vector<double> x(20);
  std::vector<double> y(20);
  const double noise = 0.5;
  const double s0 = 2.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(0.1, 2.0);
    y[i] = 0.8 * x[i] + noise * rng.normal();
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double post_var = 1.0 / (1.0 / (s0 * s0) + sxx / (noise * noise));
  const double post_mean = post_var * sxy / (noise * noise);
  const LogDensityFn target = [&](std::span<const double> q, std::span<double> g) {
    double lp = -0.5 * q[0] * q[0] / (s0 * s0);
    g[0] = -q[0] / (s0 * s0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - q[0] * x[i];
      lp -= 0.5 * r * r / (noise * noise);
      g[0] += r * x[i] / (noise * noise);
    }
    return lp;
  };
  HmcConfig cfg;
  cfg.step_size = 0.05;
  cfg.leapfrog_steps = 5;
  cfg.warmup = 1000;
  cfg.samples = 50000;
  const HmcChain chain = hmc_sample(target, {0.0}, cfg, rng);
  RunningMoments batches;
  RunningMoments all;
  for (std::size_t i = 0; i < chain.samples.size(); i += 500) {
    RunningMoments b;
    for (std::size_t j = i; j < i + 500; ++j) {
      b.add(chain.samples[j][0]);
      all.add(chain.samples[j][0]);
    }
    batches.add(b.mean());
  }
  EXPECT_LT(std::abs(all.mean() - post_mean), 4 * batches.mean_se());
  EXPECT_NEAR(all.variance(), post_var, 0.05 * post_var);
}

TEST(Hmc, EnergyErrorVanishesWithStepSize) {
  // One leapfrog trajectory of fixed length on an anisotropic Gaussian.
  const LogDensityFn target = [](std::span<const double> q, std::span<double> g) {
    g[0] = -q[0];
    g[1] = -4.0 * q[1];
    return -0.5 * q[0] * q[0] - 2.0 * q[1] * q[1];
  };
  auto energy_error = [&](double eps) {
    std::vector<double> q{1.0, 0.5};
    std::vector<double> p{0.3, -0.7};
    std::vector<double> g(2);
    double lp = target(q, g);
    const double h0 = -lp + 0.5 * (p[0] * p[0] + p[1] * p[1]);
    const int steps = static_cast<int>(std::round(1.0 / eps));
    for (int s = 0; s < steps; ++s) {
      for (int i = 0; i < 2; ++i) p[i] += 0.5 * eps * g[i];
      for (int i = 0; i < 2; ++i) q[i] += eps * p[i];
      lp = target(q, g);
      for (int i = 0; i < 2; ++i) p[i] += 0.5 * eps * g[i];
    }
    return std::abs(-lp + 0.5 * (p[0] * p[0] + p[1] * p[1]) - h0);
  };
  const double e1 = energy_error(0.1);
  const double e2 = energy_error(0.01);
  EXPECT_LT(e2, e1 / 50.0);  // second order: ~100x smaller
}

TEST(Hmc, BnnPosteriorGradientMatchesFiniteDifferences) {
  RngStream rng(19);
  const BnnPosterior post{NetworkSpec{2, {6, 5}, 1}, {1.5, 1.0}, toy_data(7, 2, rng), {0.2}};
  std::vector<double> z(post.dim());
  for (double& v : z) v = rng.normal();
  std::vector<double> g(z.size());
  post(z, g);
  std::vector<double> scratch(z.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); i += 3) {
    auto zp = z;
    auto zm = z;
    zp[i] += 1e-5;
    zm[i] -= 1e-5;
    const double fd = (post(zp, scratch) - post(zm, scratch)) / 2e-5;
    worst = std::max(worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6}));
  }
  EXPECT_LT(worst, 1e-4);
  // Log density equals log prior + log likelihood of the unwhitened network.
  const NetworkParams theta = post.unwhiten(z);
  const Matrix f = forward(theta, post.data.x);
  double ref = 0.0;
  for (double v : z) ref -= 0.5 * v * v;
  for (std::size_t n = 0; n < post.data.size(); ++n) {
    ref -= 0.5 * std::pow((f[n] - post.data.y[n]) / 0.2, 2);
  }
  EXPECT_NEAR(post(z, scratch), ref, 1e-9);
}

TEST(Hmc, ZeroAcceptanceThrows) {
  const LogDensityFn target = [](std::span<const double> q, std::span<double> g) {
    g[0] = -1e8 * q[0];
    return -0.5e8 * q[0] * q[0];
  };
  HmcConfig cfg;
  cfg.step_size = 10.0;
  cfg.warmup = 0;
  cfg.samples = 20;
  cfg.leapfrog_steps = 5;
  RngStream rng(20);
  EXPECT_THROW(hmc_sample(target, {1.0}, cfg, rng), HmcError);
}

}  // namespace
}  // namespace inbetween
