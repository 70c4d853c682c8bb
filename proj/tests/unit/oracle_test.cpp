#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "loader_rl/errors.hpp"
#include "loader_rl/evaluation.hpp"
#include "loader_rl/oracle.hpp"

namespace loader_rl {
namespace {

TEST(ScriptedPolicy, WorkedExamples) {
  const EnvConfig cfg;
  const OracleConfig oracle;
  // cruise 2 m/s, decel 2 m/s^2: stopping distance 1 m plus 0.1 m margin
  const Action far = scripted_policy({3.0, 4.0, 2.0, 0.5}, oracle, cfg);
  EXPECT_FALSE(far.brake);
  EXPECT_TRUE(far.lift_up);
  const Action near = scripted_policy({1.05, 0.0, 2.0, 0.5}, oracle, cfg);
  EXPECT_TRUE(near.brake);
  const Action high = scripted_policy({3.0, 4.0, 2.0, 0.96}, oracle, cfg);
  EXPECT_FALSE(high.lift_up);
  // a stop under way keeps the brake on
  EXPECT_TRUE(scripted_policy({3.0, 4.0, 1.5, 0.5}, oracle, cfg).brake);
}

TEST(ScriptedPolicy, SucceedsFromEveryHeading) {
  const EnvConfig cfg;
  const OracleConfig oracle;
  for (int k = 0; k < 72; ++k) {
    const double heading = k * 2.0 * M_PI / 72.0;
    for (double lift : {0.47, 0.5, 0.53}) {
      const EpisodeSummary s = run_episode(cfg, initial_state(cfg, heading, lift),
                                           oracle_policy(oracle, cfg));
      ASSERT_EQ(s.outcome, Outcome::Success) << heading << " " << lift;
      ASSERT_LE(s.total_reward, max_reward_bound(cfg) + 1e-9);
    }
  }
}

TEST(RewardOracle, MatchesEnvironmentOnRandomEpisodes) {
  EnvConfig cfg;
  cfg.time_penalty = 1e-3;
  gen::for_all(1000, 201, [&](Rng& rng, int i) {
    SCOPED_TRACE(i);
    const double brake_p = rng.uniform(0.0, 0.2);
    const double lift_p = rng.uniform(0.2, 1.0);
    Rng actions(rng.next_u64());
    const PolicyFn random = [&](const Observation&) {
      return gen::random_action(actions, brake_p, lift_p);
    };
    EpisodeTrace trace;
    const EpisodeSummary s = run_episode(cfg, rng.next_u64(), random, &trace);
    ASSERT_NEAR(reward_oracle(trace, cfg), s.total_reward, 1e-9);
  });
}

TEST(RewardOracle, LiteralModeMatchesToo) {
  EnvConfig cfg;
  cfg.lift_term = LiftTermMode::Literal;
  gen::for_all(100, 202, [&](Rng& rng, int) {
    Rng actions(rng.next_u64());
    const PolicyFn random = [&](const Observation&) { return gen::random_action(actions); };
    EpisodeTrace trace;
    const EpisodeSummary s = run_episode(cfg, rng.next_u64(), random, &trace);
    ASSERT_NEAR(reward_oracle(trace, cfg), s.total_reward, 1e-9);
  });
}

TEST(RewardOracle, ClosedFormForTheScriptedRun) {
  // with no time penalty shaping telescopes: distance covered plus lift
  // progress up to the goal plus the success bonus
  EnvConfig cfg;
  cfg.time_penalty = 0.0;
  EpisodeTrace trace;
  const EpisodeSummary s =
      run_episode(cfg, initial_state(cfg, 0.7, 0.5), oracle_policy(OracleConfig{}, cfg), &trace);
  ASSERT_EQ(s.outcome, Outcome::Success);
  const TraceRow& before_last = trace.rows[trace.rows.size() - 2];
  const double d = std::hypot(before_last.rel_x, before_last.rel_y);
  const double goal = cfg.lift_goal_frac * cfg.vehicle.lift_max;
  const double expected = (cfg.target_distance - d) +
                          cfg.lift_reward_scale * (std::min(before_last.lift, goal) - 0.5) +
                          1.0;
  EXPECT_NEAR(reward_oracle(trace, cfg), expected, 1e-9);
}

TEST(RewardOracle, RejectsMalformedTraces) {
  const EnvConfig cfg;
  EpisodeTrace trace;
  run_episode(cfg, 3, oracle_policy(OracleConfig{}, cfg), &trace);
  EpisodeTrace gap = trace;
  gap.rows.erase(gap.rows.begin() + 3);
  EXPECT_THROW(reward_oracle(gap, cfg), FormatError);
  EpisodeTrace tail = trace;
  tail.rows.push_back(tail.rows.back());
  tail.rows.back().step += 1;
  EXPECT_THROW(reward_oracle(tail, cfg), FormatError);
}

TEST(MaxRewardBound, Examples) {
  EnvConfig cfg;
  cfg.lift_reward_scale = 0.0;
  EXPECT_DOUBLE_EQ(max_reward_bound(cfg), 6.0);
  cfg = EnvConfig{};
  EXPECT_NEAR(max_reward_bound(cfg), 5.0 + (5.0 / 0.45) * (0.95 - 0.47) + 1.0, 1e-12);
  cfg.lift_term = LiftTermMode::Literal;
  EXPECT_THROW(max_reward_bound(cfg), std::invalid_argument);
}

TEST(OracleConfig, Validate) {
  OracleConfig o;
  EXPECT_NO_THROW(o.validate());
  o.brake_margin = -0.1;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace loader_rl
