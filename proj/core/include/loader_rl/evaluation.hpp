#ifndef LOADER_RL_EVALUATION_HPP_
#define LOADER_RL_EVALUATION_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "loader_rl/approach_env.hpp"
#include "loader_rl/oracle.hpp"
#include "loader_rl/policy.hpp"
#include "loader_rl/trace.hpp"

namespace loader_rl {

using PolicyFn = std::function<Action(const Observation&)>;

// Deterministic policy from trained parameters (copied into the closure).
PolicyFn greedy_policy(const PolicyParams& params, const EnvConfig& config);
PolicyFn oracle_policy(const OracleConfig& oracle, const EnvConfig& config);

// Headings where one of the initial relative coordinates is close to zero.
bool is_degenerate_heading(double heading, double threshold = 0.05);

struct EpisodeSummary {
  std::uint64_t seed = 0;
  double heading = 0.0;
  double total_reward = 0.0;
  Outcome outcome = Outcome::Running;
  long steps = 0;
  double stop_error = 0.0;  // distance to the target when the episode ended
  bool degenerate = false;
};

EpisodeSummary run_episode(const EnvConfig& config, EnvState initial,
                           const PolicyFn& policy,
                           EpisodeTrace* trace = nullptr,
                           const std::string& config_digest = "");
EpisodeSummary run_episode(const EnvConfig& config, std::uint64_t seed,
                           const PolicyFn& policy,
                           EpisodeTrace* trace = nullptr,
                           const std::string& config_digest = "");

struct BucketStats {
  int episodes = 0;
  double reward_mean = 0.0;
  double reward_variance = 0.0;  // population variance
  double success_rate = 0.0;
  double stop_error_mean = 0.0;
};

struct EvalReport {
  BucketStats all;
  BucketStats regular;     // non-degenerate headings
  BucketStats degenerate;
  std::vector<EpisodeSummary> episodes;
};

// Episode i is reset with the i-th draw of the "eval" sub-stream of `seed`.
std::vector<std::uint64_t> episode_seeds(std::uint64_t seed, int count);

// Throws std::invalid_argument when `episodes` <= 0.
EvalReport evaluate(const EnvConfig& config, const PolicyFn& policy,
                    int episodes, std::uint64_t seed);

}  // namespace loader_rl

#endif  // LOADER_RL_EVALUATION_HPP_
