#include <gtest/gtest.h>

#include <cmath>

#include "inbetween/bnn/moments.hpp"
#include "inbetween/bnn/network.hpp"
#include "inbetween/bnn/serialize.hpp"
#include "inbetween/core/stats.hpp"

namespace inbetween {
namespace {

FFGParams random_ffg(const NetworkSpec& spec, RngStream& rng, double log_std_mean = -1.0) {
  FFGParams q = zero_ffg(spec, 1.0);
  for (auto& g : q.layers) {
    for (double& v : g.w_mean.flat()) v = rng.normal();
    for (double& v : g.b_mean.flat()) v = rng.normal();
    for (double& v : g.w_log_std.flat()) v = log_std_mean + 0.5 * rng.normal();
    for (double& v : g.b_log_std.flat()) v = log_std_mean + 0.5 * rng.normal();
  }
  return q;
}

MCDOParams random_mcdo(const NetworkSpec& spec, double p, bool drop_inputs, RngStream& rng) {
  MCDOParams q{spec, zero_params(spec).layers, p, drop_inputs};
  for (auto& l : q.layers) {
    for (double& v : l.w.flat()) v = rng.normal();
    for (double& v : l.b.flat()) v = rng.normal();
  }
  return q;
}

// Independent forward pass: explicit loops, no kernels.
std::vector<double> naive_forward(const NetworkParams& theta, std::span<const double> x) {
  std::vector<double> h(x.begin(), x.end());
  for (std::size_t l = 0; l < theta.layers.size(); ++l) {
    const auto& layer = theta.layers[l];
    std::vector<double> z(layer.w.cols());
    for (std::size_t j = 0; j < z.size(); ++j) {
      double s = layer.b(0, j);
      for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * layer.w(i, j);
      z[j] = (l + 1 < theta.layers.size()) ? std::max(0.0, s) : s;
    }
    h = std::move(z);
  }
  return h;
}

TEST(Network, SpecValidation) {
  EXPECT_THROW((NetworkSpec{1, {}, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((NetworkSpec{1, {3, 0}, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((NetworkSpec{0, {3}, 1}.validate()), std::invalid_argument);
  const auto s = NetworkSpec::uniform(2, 3, 7);
  EXPECT_EQ(s.dims(), (std::vector<std::size_t>{2, 7, 7, 7, 1}));
}

TEST(Forward, ZeroWeightsGiveBias) {
  NetworkParams theta = zero_params(NetworkSpec::uniform(3, 2, 5));
  theta.layers.back().b(0, 0) = 1.25;
  const Matrix y = forward(theta, Matrix(4, 3, 0.7));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(y(i, 0), 1.25);
}

TEST(Forward, SingleReluNeuron) {
  NetworkParams theta = zero_params(NetworkSpec{1, {1}, 1});
  theta.layers[0].w(0, 0) = 1.0;
  theta.layers[1].w(0, 0) = 1.0;
  const Matrix y = forward(theta, Matrix::column_vector(std::vector<double>{2.0, -2.0}));
  EXPECT_EQ(y(0, 0), 2.0);
  EXPECT_EQ(y(1, 0), 0.0);
}

TEST(Forward, MatchesNaiveLoopOracle) {
  RngStream rng(1);
  const NetworkSpec spec{3, {6, 4, 5}, 2};
  for (int t = 0; t < 10; ++t) {
    const NetworkParams theta = sample_params(random_ffg(spec, rng), rng);
    Matrix x(7, 3);
    for (double& v : x.flat()) v = rng.normal();
    const Matrix y = forward(theta, x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto ref = naive_forward(theta, x.row(r));
      for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(y(r, k), ref[k], 1e-12);
    }
  }
  EXPECT_THROW(forward(zero_params(spec), Matrix(2, 2)), ShapeError);
}

TEST(SampleParams, TinyStdReturnsMeans) {
  RngStream rng(2);
  FFGParams q = random_ffg(NetworkSpec::uniform(2, 1, 4), rng);
  for (auto& g : q.layers) {
    g.w_log_std.fill(std::log(1e-30));
    g.b_log_std.fill(std::log(1e-30));
  }
  const NetworkParams theta = sample_params(q, rng);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_LT(max_abs_diff(theta.layers[l].w, q.layers[l].w_mean), 1e-25);
    EXPECT_LT(max_abs_diff(theta.layers[l].b, q.layers[l].b_mean), 1e-25);
  }
}

TEST(SampleParams, FfgWeightSampleMeanWithinFourSe) {
  RngStream rng(3);
  FFGParams q = zero_ffg(NetworkSpec{1, {1}, 1}, 0.7);
  q.layers[0].w_mean(0, 0) = 0.3;
  RunningMoments acc;
  for (int i = 0; i < 100000; ++i) acc.add(sample_params(q, rng).layers[0].w(0, 0));
  EXPECT_LT(std::abs(acc.mean() - 0.3), 4 * acc.mean_se());
  EXPECT_LT(std::abs(acc.variance() - 0.49), 4 * acc.variance_se());
}

TEST(SampleParams, McdoMasksWholeInputRows) {
  RngStream rng(4);
  const NetworkSpec spec{3, {20, 20}, 1};
  const MCDOParams q = random_mcdo(spec, 0.3, false, rng);
  std::size_t dropped = 0;
  std::size_t total = 0;
  for (int t = 0; t < 200; ++t) {
    const NetworkParams theta = sample_params(q, rng);
    EXPECT_EQ(theta.layers[0].w, q.layers[0].w);  // inputs kept
    for (std::size_t l = 1; l < 3; ++l) {
      EXPECT_EQ(theta.layers[l].b, q.layers[l].b);
      for (std::size_t r = 0; r < theta.layers[l].w.rows(); ++r) {
        const auto row = theta.layers[l].w.row(r);
        const bool zero = std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
        if (!zero) {
          for (std::size_t c = 0; c < row.size(); ++c) EXPECT_EQ(row[c], q.layers[l].w(r, c));
        }
        dropped += zero ? 1 : 0;
        ++total;
      }
    }
  }
  const double rate = static_cast<double>(dropped) / static_cast<double>(total);
  EXPECT_NEAR(rate, 0.3, 4 * std::sqrt(0.3 * 0.7 / static_cast<double>(total)));

  const MCDOParams qi = random_mcdo(spec, 0.5, true, rng);
  bool first_layer_masked = false;
  for (int t = 0; t < 20; ++t) first_layer_masked |= !(sample_params(qi, rng).layers[0].w == qi.layers[0].w);
  EXPECT_TRUE(first_layer_masked);
}

TEST(SampleParams, McdoTinyRateIsDeterministic) {
  RngStream rng(5);
  const MCDOParams q = random_mcdo(NetworkSpec::uniform(2, 2, 8), 1e-15, true, rng);
  for (int t = 0; t < 50; ++t) {
    const NetworkParams theta = sample_params(q, rng);
    for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(theta.layers[l].w, q.layers[l].w);
  }
}

TEST(ClosedForm, SingleTermVarianceIsPsiSquared) {
  // First layer deterministic with a(x) = 1; output weight ~ N(0, 1).
  FFGParams q = zero_ffg(NetworkSpec{1, {1}, 1}, 1e-30);
  q.layers[0].b_mean(0, 0) = 1.0;
  q.layers[1].w_log_std(0, 0) = 0.0;
  const auto m = closed_form_1hl_moments(q, std::vector<double>{0.4});
  EXPECT_NEAR(m[0].variance, 1.0, 1e-12);
  EXPECT_NEAR(m[0].mean, 0.0, 1e-12);
}

TEST(ClosedForm, DeterministicLimitMatchesForward) {
  RngStream rng(6);
  FFGParams q = random_ffg(NetworkSpec{2, {9}, 2}, rng);
  for (auto& g : q.layers) {
    g.w_log_std.fill(std::log(1e-30));
    g.b_log_std.fill(std::log(1e-30));
  }
  const std::vector<double> x{0.3, -1.2};
  const auto m = closed_form_1hl_moments(q, x);
  const auto f = naive_forward(ffg_means(q), x);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(m[k].mean, f[k], 1e-12);
    EXPECT_LT(m[k].variance, 1e-40);
  }
}

TEST(ClosedForm, FfgMatchesMonteCarlo) {
  RngStream rng(7);
  for (int t = 0; t < 3; ++t) {
    const FFGParams q = random_ffg(NetworkSpec{2, {50}, 1}, rng, -0.7);
    Matrix x(3, 2);
    for (double& v : x.flat()) v = rng.normal();
    const auto mc = predictive_mc(q, x, 100000, rng.split(100 + t));
    for (std::size_t r = 0; r < 3; ++r) {
      const auto cf = closed_form_1hl_moments(q, x.row(r))[0];
      EXPECT_LE(std::abs(cf.mean - mc.mean(r, 0)), 4 * mc.mean_se(r, 0));
      EXPECT_LE(std::abs(cf.variance - mc.var(r, 0)), 4 * mc.var_se(r, 0));
    }
  }
}

TEST(ClosedForm, McdoSmallCasesAndErrors) {
  MCDOParams q{NetworkSpec{1, {1}, 1}, zero_params(NetworkSpec{1, {1}, 1}).layers, 0.5, false};
  q.layers[0].b(0, 0) = 2.0;  // psi(a) = 2
  q.layers[1].w(0, 0) = 1.0;
  const auto m = closed_form_1hl_moments_mcdo(q, std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(m[0].variance, 1.0);
  EXPECT_DOUBLE_EQ(m[0].mean, 1.0);
  q.p = 1e-12;
  EXPECT_LT(closed_form_1hl_moments_mcdo(q, std::vector<double>{0.0})[0].variance, 1e-11);
  q.drop_inputs = true;
  EXPECT_THROW(closed_form_1hl_moments_mcdo(q, std::vector<double>{0.0}), std::invalid_argument);
  RngStream rng(1);
  EXPECT_THROW(closed_form_1hl_moments(random_ffg(NetworkSpec::uniform(1, 2, 3), rng),
                                       std::vector<double>{0.0}),
               std::invalid_argument);
}

TEST(ClosedForm, McdoMatchesMonteCarlo) {
  RngStream rng(8);
  const MCDOParams q = random_mcdo(NetworkSpec{2, {50}, 1}, 0.2, false, rng);
  Matrix x(3, 2);
  for (double& v : x.flat()) v = rng.normal();
  const auto mc = predictive_mc(q, x, 100000, rng.split(9));
  for (std::size_t r = 0; r < 3; ++r) {
    const auto cf = closed_form_1hl_moments_mcdo(q, x.row(r))[0];
    EXPECT_LE(std::abs(cf.mean - mc.mean(r, 0)), 4 * mc.mean_se(r, 0));
    EXPECT_LE(std::abs(cf.variance - mc.var(r, 0)), 4 * mc.var_se(r, 0));
  }
}

TEST(PredictiveMc, DeterministicDistributionHasZeroVariance) {
  RngStream rng(9);
  FFGParams q = random_ffg(NetworkSpec::uniform(2, 2, 5), rng);
  for (auto& g : q.layers) {
    g.w_log_std.fill(-200.0);
    g.b_log_std.fill(-200.0);
  }
  const auto mc = predictive_mc(q, Matrix(4, 2, 0.5), 10, rng);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(mc.var[i], 1e-150);
  EXPECT_THROW(predictive_mc(q, Matrix(4, 2), 1, rng), std::invalid_argument);
}

TEST(PredictiveMc, IndependentOfEvaluationOrderAndReproducible) {
  RngStream rng(10);
  const ParamDist q = random_mcdo(NetworkSpec::uniform(1, 2, 6), 0.3, true, rng);
  const Matrix x = Matrix::column_vector(std::vector<double>{-1.0, 0.0, 1.0});
  const auto a = predictive_mc(q, x, 500, RngStream(77, 1));
  const auto b = predictive_mc(q, x, 500, RngStream(77, 1));
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.var, b.var);
}

TEST(Init, MfviDefaults) {
  RngStream rng(11);
  const FFGParams q = init_mfvi(NetworkSpec::uniform(2, 2, 50), rng);
  for (const auto& g : q.layers) {
    for (double v : g.w_log_std.flat()) EXPECT_DOUBLE_EQ(v, std::log(1e-5));
    for (double v : g.b_log_std.flat()) EXPECT_DOUBLE_EQ(v, std::log(1e-5));
    for (double v : g.b_mean.flat()) EXPECT_EQ(v, 0.0);
  }
  // Hidden layer: n_out = 50, weight-mean variance 1/sqrt(100) = 0.1.
  const double var = variance_of(q.layers[1].w_mean.flat());
  EXPECT_NEAR(var, 0.1, 4 * 0.1 * std::sqrt(2.0 / 2500.0));
}

TEST(Init, PriorScales) {
  const PriorConfig prior{2.0, 1.5};
  const FFGParams q = prior_ffg(NetworkSpec{4, {9}, 1}, prior);
  EXPECT_DOUBLE_EQ(std::exp(q.layers[0].w_log_std(0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(std::exp(q.layers[1].w_log_std(0, 0)), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(std::exp(q.layers[1].b_log_std(0, 0)), 1.5);
  for (const auto& g : q.layers) {
    for (double v : g.w_mean.flat()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Init, McdoUniformFanInAndDeterminism) {
  RngStream a(12);
  RngStream b(12);
  const NetworkSpec spec = NetworkSpec::uniform(4, 2, 16);
  const MCDOParams qa = init_mcdo(spec, 0.1, false, a);
  const MCDOParams qb = init_mcdo(spec, 0.1, false, b);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(qa.layers[l].w, qb.layers[l].w);
    const double bound = 1.0 / std::sqrt(static_cast<double>(qa.layers[l].w.rows()));
    for (double v : qa.layers[l].w.flat()) EXPECT_LE(std::abs(v), bound);
  }
  RngStream c(12);
  const ParamDist d = init_params(spec, InitMethod::kMfviDefault, {}, c);
  RngStream e(12);
  const ParamDist f = init_params(spec, InitMethod::kMfviDefault, {}, e);
  EXPECT_EQ(std::get<FFGParams>(d).layers[0].w_mean, std::get<FFGParams>(f).layers[0].w_mean);
  EXPECT_THROW(init_mcdo(spec, 1.0, false, c), std::invalid_argument);
}

TEST(Serialize, RoundTrips) {
  RngStream rng(13);
  const ParamDist ffg = random_ffg(NetworkSpec{2, {3, 4}, 1}, rng);
  const ParamDist back = dist_from_json(nlohmann::json::parse(to_json(ffg).dump()));
  const auto& a = std::get<FFGParams>(ffg);
  const auto& b = std::get<FFGParams>(back);
  EXPECT_EQ(a.spec, b.spec);
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    EXPECT_EQ(a.layers[l].w_mean, b.layers[l].w_mean);
    EXPECT_EQ(a.layers[l].b_log_std, b.layers[l].b_log_std);
  }
  const ParamDist mc = random_mcdo(NetworkSpec{1, {5}, 1}, 0.25, true, rng);
  const auto mb = std::get<MCDOParams>(dist_from_json(to_json(mc)));
  EXPECT_EQ(mb.p, 0.25);
  EXPECT_TRUE(mb.drop_inputs);
  EXPECT_EQ(mb.layers[1].w, std::get<MCDOParams>(mc).layers[1].w);
  const NetworkParams theta = sample_params(ffg, rng);
  EXPECT_EQ(params_from_json(to_json(theta)).layers[0].w, theta.layers[0].w);
  auto bad = to_json(ffg);
  bad["layers"][0]["w_mean"]["rows"] = 7;
  EXPECT_THROW(dist_from_json(bad), std::exception);
}

}  // namespace
}  // namespace inbetween
