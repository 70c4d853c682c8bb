#ifndef LOADER_RL_TRAINER_HPP_
#define LOADER_RL_TRAINER_HPP_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "loader_rl/checkpoint.hpp"
#include "loader_rl/run_config.hpp"

namespace loader_rl {

struct MetricsRow {
  long timestep = 0;
  int updates = 0;
  double ep_reward_mean = 0.0;  // over the last 100 finished episodes, NaN if none
  double ep_len_mean = 0.0;
  double success_rate = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double ratio_mean = 0.0;
};

std::vector<std::string> metrics_columns();
// "# loader_rl-metrics v1", the digest comment, then the column header.
void write_metrics_header(std::ostream& os, const std::string& config_digest);
std::string format_metrics_row(const MetricsRow& row);

enum class CheckpointKind { Periodic, Best, Final };

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_metrics;
  std::function<void(const PolicyCheckpoint&, CheckpointKind)> on_checkpoint;
  std::function<void(const std::string&)> on_log;
};

struct TrainResult {
  PolicyCheckpoint final_checkpoint;
  PolicyCheckpoint best_checkpoint;
  double best_success_rate = -1.0;
  double best_reward_mean = 0.0;
  int updates = 0;
  int aborted_updates = 0;
};

// Alternates n_steps of rollout with a PPO update until total_timesteps.
// The greedy policy is scored every eval_every updates on a fixed episode
// set (success rate, then mean reward) and the best one is kept. If the
// loop throws, a Final checkpoint of the current parameters is emitted
// before the exception propagates. Ten consecutive aborted updates raise
// NumericalError.
TrainResult train(const RunConfig& config, const TrainHooks& hooks = {});

}  // namespace loader_rl

#endif  // LOADER_RL_TRAINER_HPP_
