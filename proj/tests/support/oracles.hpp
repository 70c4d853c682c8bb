#ifndef LOADER_RL_TESTS_ORACLES_HPP_
#define LOADER_RL_TESTS_ORACLES_HPP_

// Independent reference computations. Nothing here calls into the code it
// checks; each formula is written out in plain scalar loops.

#include <cstdint>
#include <vector>

namespace loader_rl::oracle_ref {

// A_t = sum_k (gamma*lambda)^k delta_{t+k}, stopping after the first
// terminal transition at or after t. V(s_n) is the bootstrap value.
std::vector<double> brute_force_gae(const std::vector<double>& rewards,
                                    const std::vector<double>& values,
                                    const std::vector<std::uint8_t>& dones,
                                    double bootstrap, double gamma, double lambda);

// -mean(min(r*A, clip(r, 1-eps, 1+eps)*A))
double scalar_clipped_loss(const std::vector<double>& ratios,
                           const std::vector<double>& advantages, double eps);

// Tanh MLP evaluated from the flat parameter layout: per layer, W (out x in,
// column-major) followed by b.
std::vector<double> scalar_mlp(const std::vector<int>& sizes,
                               const std::vector<double>& params,
                               const std::vector<double>& input);

struct ScalarSample {
  std::vector<double> obs;  // already normalized
  bool brake = false;
  bool lift = false;
  double old_log_prob = 0.0;
  double advantage = 0.0;  // raw
  double ret = 0.0;
};

struct ScalarLoss {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

// Bernoulli-heads PPO loss with per-batch advantage normalization
// (unbiased std + 1e-8), MSE value loss, and mean entropy.
ScalarLoss scalar_ppo_loss(const std::vector<int>& actor_sizes,
                           const std::vector<double>& actor_params,
                           const std::vector<int>& critic_sizes,
                           const std::vector<double>& critic_params,
                           const std::vector<ScalarSample>& batch, double clip,
                           double vf_coef, double ent_coef);

// One reward step of the approach task, written from the task statement:
// failure flags first, then success, else shaping.
struct RewardCase {
  double prev_distance, curr_distance, prev_lift, curr_lift, speed;
  long step;
  bool out_of_range, timeout;
};
double reference_reward(const RewardCase& c, double vicinity, double speed_threshold,
                        double lift_goal, double lift_scale, double time_penalty);

}  // namespace loader_rl::oracle_ref

#endif  // LOADER_RL_TESTS_ORACLES_HPP_
