#ifndef LOADER_RL_ORACLE_HPP_
#define LOADER_RL_ORACLE_HPP_

#include "loader_rl/approach_env.hpp"
#include "loader_rl/trace.hpp"

namespace loader_rl {

struct OracleConfig {
  double brake_margin = 0.1;  // m added to the ideal stopping distance

  void validate() const;
};

// Stateless reference controller: lift until the goal fraction, brake once
// the remaining distance is within v^2 / (2a) + margin, and keep braking
// while the vehicle is below cruise speed.
Action scripted_policy(const Observation& obs, const OracleConfig& oracle,
                       const EnvConfig& config);

// Re-evaluates every step reward of `trace` from its raw columns and returns
// the sum. Independent of compute_reward; throws FormatError on malformed
// traces (non-consecutive steps, rows after a terminal step).
double reward_oracle(const EpisodeTrace& trace, const EnvConfig& config);

// Upper bound on the undiscounted episode reward when the time penalty is
// zero: full distance shaping, lift shaping from the lowest possible start
// lift, plus the success bonus. GoalProgress lift term only.
double max_reward_bound(const EnvConfig& config);

}  // namespace loader_rl

#endif  // LOADER_RL_ORACLE_HPP_
