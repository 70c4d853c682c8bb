#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "loader_rl/mlp.hpp"
#include "loader_rl/policy.hpp"
#include "oracles.hpp"

namespace loader_rl {
namespace {

Mlp random_mlp(std::vector<int> sizes, Rng& rng) {
  Mlp m(std::move(sizes));
  for (double& p : m.params()) p = rng.uniform(-0.5, 0.5);
  return m;
}

TEST(Mlp, ForwardMatchesScalarReference) {
  gen::for_all(50, 71, [](Rng& rng, int i) {
    SCOPED_TRACE(i);
    const Mlp m = random_mlp({4, 7, 5, 2}, rng);
    const std::vector<double> x = gen::vector(rng, 4, -3.0, 3.0);
    const Eigen::MatrixXd out = m.forward(Eigen::Map<const Eigen::VectorXd>(x.data(), 4));
    const std::vector<double> ref = oracle_ref::scalar_mlp(
        m.layer_sizes(), {m.params().begin(), m.params().end()}, x);
    ASSERT_NEAR(out(0, 0), ref[0], 1e-12);
    ASSERT_NEAR(out(1, 0), ref[1], 1e-12);
  });
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  Rng rng(72);
  Mlp m = random_mlp({3, 6, 4, 2}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(3, 5, [&] { return rng.uniform(-1, 1); });
  const Eigen::MatrixXd w = Eigen::MatrixXd::NullaryExpr(2, 5, [&] { return rng.uniform(-1, 1); });
  // loss = sum(w .* out)
  Mlp::Cache cache;
  m.forward(x, &cache);
  std::vector<double> grad(m.params().size(), 0.0);
  m.backward(cache, w, grad);
  const double h = 1e-6;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double keep = m.params()[k];
    m.params()[k] = keep + h;
    const double up = (w.array() * m.forward(x).array()).sum();
    m.params()[k] = keep - h;
    const double down = (w.array() * m.forward(x).array()).sum();
    m.params()[k] = keep;
    ASSERT_NEAR(grad[k], (up - down) / (2 * h), 1e-7) << "param " << k;
  }
}

TEST(Mlp, OrthogonalInitHasOrthonormalRowsOrColumns) {
  Rng rng(73);
  Mlp m({4, 64, 64, 2});
  m.init_orthogonal(rng, std::sqrt(2.0), 0.01);
  std::size_t off = 0;
  const std::vector<int>& s = m.layer_sizes();
  for (int l = 0; l < m.num_layers(); ++l) {
    const int in = s[static_cast<std::size_t>(l)], out = s[static_cast<std::size_t>(l) + 1];
    const Eigen::Map<const Eigen::MatrixXd> W(m.params().data() + off, out, in);
    const double gain = l + 1 == m.num_layers() ? 0.01 : std::sqrt(2.0);
    const Eigen::MatrixXd G = out <= in ? Eigen::MatrixXd(W * W.transpose())
                                        : Eigen::MatrixXd(W.transpose() * W);
    EXPECT_TRUE(G.isApprox(gain * gain * Eigen::MatrixXd::Identity(G.rows(), G.cols()), 1e-10))
        << "layer " << l;
    for (int b = 0; b < out; ++b) EXPECT_EQ(m.params()[off + static_cast<std::size_t>(in * out + b)], 0.0);
    off += static_cast<std::size_t>(in * out + out);
  }
}

TEST(ObsNormalizer, RunningMomentsMatchBatchMoments) {
  Rng rng(74);
  ObsNormalizer n(3);
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 500; ++i) {
    xs.push_back(gen::vector(rng, 3, -5.0, 9.0));
    n.update(xs.back());
  }
  for (std::size_t d = 0; d < 3; ++d) {
    double mean = 0.0;
    for (const auto& x : xs) mean += x[d] / 500.0;
    double var = 0.0;
    for (const auto& x : xs) var += (x[d] - mean) * (x[d] - mean) / 500.0;
    // the 1e-4 prior count only perturbs the moments slightly
    EXPECT_NEAR(n.mean[d], mean, 1e-5);
    EXPECT_NEAR(n.var[d], var, 1e-4);
  }
}

TEST(ObsNormalizer, ClipsToTenStandardDeviations) {
  ObsNormalizer n(1);
  EXPECT_EQ(n.normalize(std::vector<double>{1e6})[0], 10.0);
  EXPECT_EQ(n.normalize(std::vector<double>{-1e6})[0], -10.0);
  EXPECT_NEAR(n.normalize(std::vector<double>{0.5})[0], 0.5 / std::sqrt(1.0 + 1e-8), 1e-15);
}

PolicyParams zero_policy() {
  Rng rng(0);
  PolicyParams p = make_policy(4, ExplorationMode::BernoulliHeads, rng);
  for (double& w : p.actor.params()) w = 0.0;
  for (double& w : p.critic.params()) w = 0.0;
  return p;
}

TEST(PolicyForward, ZeroWeightsGiveZeroOutputs) {
  const PolicyParams p = zero_policy();
  const PolicyOutput out = policy_forward(p, std::vector<double>{3.0, 1.0, 2.0, 0.5});
  EXPECT_EQ(out.logits[0], 0.0);
  EXPECT_EQ(out.logits[1], 0.0);
  EXPECT_EQ(out.value, 0.0);
}

TEST(PolicyForward, SeededInitIsReproducible) {
  Rng a(5), b(5);
  const PolicyParams pa = make_policy(4, ExplorationMode::BernoulliHeads, a);
  const PolicyParams pb = make_policy(4, ExplorationMode::BernoulliHeads, b);
  EXPECT_EQ(pa, pb);
  const std::vector<double> obs{1.0, 2.0, 2.0, 0.5};
  const PolicyOutput x = policy_forward(pa, obs), y = policy_forward(pa, obs);
  EXPECT_EQ(x.logits, y.logits);
  EXPECT_EQ(x.value, y.value);
}

TEST(PolicyForward, RejectsNonFiniteObservation) {
  const PolicyParams p = zero_policy();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(policy_forward(p, std::vector<double>{nan, 0, 0, 0}), std::invalid_argument);
}

TEST(Bernoulli, ZeroLogitsGiveHalfProbability) {
  EXPECT_NEAR(std::exp(log_sigmoid(0.0)), 0.5, 1e-15);
  EXPECT_NEAR(bernoulli_log_prob({0.0, 0.0}, {true, false}), 2 * std::log(0.5), 1e-15);
  EXPECT_NEAR(bernoulli_log_prob({0.0, 0.0}, {true, false}), -1.38629, 1e-5);
}

TEST(Bernoulli, SaturatedLogitsSampleOnWithNearZeroLogProb) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const SampledAction s = sample_action({20.0, 20.0}, rng);
    EXPECT_TRUE(s.action.brake);
    EXPECT_TRUE(s.action.lift_up);
    EXPECT_NEAR(s.log_prob, 0.0, 1e-8);
  }
}

TEST(Bernoulli, GreedyUsesLogitSign) {
  const Action a = greedy_action({0.3, -0.2});
  EXPECT_TRUE(a.brake);
  EXPECT_FALSE(a.lift_up);
}

TEST(Bernoulli, LogSigmoidStaysFiniteAtExtremes) {
  EXPECT_NEAR(log_sigmoid(800.0), 0.0, 1e-300);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
}

TEST(Bernoulli, SampleFrequencyMatchesProbability) {
  Rng rng(7);
  int on = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) on += sample_action({1.0, -1.0}, rng).action.brake;
  EXPECT_NEAR(static_cast<double>(on) / n, 1.0 / (1.0 + std::exp(-1.0)), 0.01);
}

TEST(Bernoulli, EntropyMaximalAtZeroLogits) {
  EXPECT_NEAR(bernoulli_entropy({0.0, 0.0}), 2 * std::log(2.0), 1e-15);
  gen::for_all(200, 75, [](Rng& rng, int) {
    const HeadArray l{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    ASSERT_LT(bernoulli_entropy(l), 2 * std::log(2.0));
  });
}

TEST(Gaussian, LogProbAndEntropyClosedForm) {
  const std::vector<double> log_std{std::log(0.5), 0.0};
  const double lp = gaussian_log_prob({0.0, 1.0}, log_std, {0.5, 0.0});
  const double z0 = 1.0, z1 = -1.0;
  const double ref = -0.5 * z0 * z0 - std::log(0.5) - 0.5 * std::log(2 * M_PI) +
                     -0.5 * z1 * z1 - 0.0 - 0.5 * std::log(2 * M_PI);
  EXPECT_NEAR(lp, ref, 1e-14);
  EXPECT_NEAR(gaussian_entropy(log_std), 1.0 + std::log(2 * M_PI) + std::log(0.5), 1e-14);
}

TEST(Gaussian, NoiseIsHeldForResamplePeriod) {
  HeldNoiseSampler sampler(4);
  Rng rng(8);
  const std::vector<double> log_std{0.0, 0.0};
  std::vector<double> first;
  for (int i = 0; i < 12; ++i) {
    const SampledAction s = sampler.sample({0.0, 0.0}, log_std, rng);
    if (i % 4 == 0) first = {s.raw[0], s.raw[1]};
    EXPECT_EQ(s.raw[0], first[0]) << i;
    EXPECT_EQ(s.raw[1], first[1]) << i;
    EXPECT_EQ(s.action.brake, s.raw[0] > 0.0);
  }
}

TEST(Gaussian, ThresholdAtZero) {
  const Action a = threshold_action({0.01, -0.01});
  EXPECT_TRUE(a.brake);
  EXPECT_FALSE(a.lift_up);
  EXPECT_FALSE(threshold_action({0.0, 0.0}).brake);
}

}  // namespace
}  // namespace loader_rl
