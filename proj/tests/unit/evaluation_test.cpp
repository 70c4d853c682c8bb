#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "loader_rl/evaluation.hpp"

namespace loader_rl {
namespace {

TEST(DegenerateHeading, NearTheAxes) {
  EXPECT_TRUE(is_degenerate_heading(0.0));
  EXPECT_TRUE(is_degenerate_heading(M_PI / 2));
  EXPECT_TRUE(is_degenerate_heading(M_PI + 0.04));
  EXPECT_FALSE(is_degenerate_heading(M_PI / 4));
  EXPECT_FALSE(is_degenerate_heading(0.06));
  EXPECT_TRUE(is_degenerate_heading(0.06, 0.1));
}

TEST(Evaluate, RejectsNonPositiveEpisodeCount) {
  const EnvConfig cfg;
  const PolicyFn p = oracle_policy(OracleConfig{}, cfg);
  EXPECT_THROW(evaluate(cfg, p, 0, 1), std::invalid_argument);
  EXPECT_THROW(evaluate(cfg, p, -3, 1), std::invalid_argument);
}

TEST(Evaluate, EpisodeSeedsAreDeterministicAndDistinct) {
  const auto a = episode_seeds(11, 200);
  EXPECT_EQ(a, episode_seeds(11, 200));
  EXPECT_EQ(std::set<std::uint64_t>(a.begin(), a.end()).size(), a.size());
  EXPECT_NE(a, episode_seeds(12, 200));
}

TEST(Evaluate, OracleReportIsDeterministicAndConsistent) {
  const EnvConfig cfg;
  const PolicyFn p = oracle_policy(OracleConfig{}, cfg);
  const EvalReport a = evaluate(cfg, p, 60, 4);
  const EvalReport b = evaluate(cfg, p, 60, 4);
  ASSERT_EQ(a.episodes.size(), 60u);
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_EQ(a.episodes[i].total_reward, b.episodes[i].total_reward);
    EXPECT_EQ(a.episodes[i].steps, b.episodes[i].steps);
  }
  EXPECT_EQ(a.all.episodes, 60);
  EXPECT_EQ(a.regular.episodes + a.degenerate.episodes, 60);
  EXPECT_EQ(a.all.success_rate, 1.0);

  double mean = 0.0;
  for (const auto& e : a.episodes) mean += e.total_reward;
  mean /= 60.0;
  double var = 0.0;
  for (const auto& e : a.episodes) var += (e.total_reward - mean) * (e.total_reward - mean);
  var /= 60.0;
  EXPECT_NEAR(a.all.reward_mean, mean, 1e-12);
  EXPECT_NEAR(a.all.reward_variance, var, 1e-12);
  for (const auto& e : a.episodes) {
    EXPECT_EQ(e.degenerate, is_degenerate_heading(e.heading));
    EXPECT_LT(e.stop_error, cfg.vicinity);
  }
}

TEST(Evaluate, GreedyPolicyIsDeterministic) {
  const EnvConfig cfg;
  Rng rng(3);
  const PolicyParams params = make_policy(4, ExplorationMode::BernoulliHeads, rng);
  const PolicyFn p = greedy_policy(params, cfg);
  const EpisodeSummary a = run_episode(cfg, 9, p);
  const EpisodeSummary b = run_episode(cfg, 9, p);
  EXPECT_EQ(a.total_reward, b.total_reward);
  EXPECT_EQ(a.steps, b.steps);
}

}  // namespace
}  // namespace loader_rl
