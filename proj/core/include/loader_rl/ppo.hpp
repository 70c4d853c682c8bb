#ifndef LOADER_RL_PPO_HPP_
#define LOADER_RL_PPO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "loader_rl/policy.hpp"
#include "loader_rl/rng.hpp"

namespace loader_rl {

struct TrainConfig {
  double learning_rate = 3e-5;
  int n_steps = 512;
  int batch_size = 128;
  int n_epochs = 20;
  double gamma = 0.99;
  double gae_lambda = 0.9;
  double clip_range = 0.4;
  double ent_coef = 0.0;
  double vf_coef = 0.5;
  double max_grad_norm = 0.5;
  int n_envs = 1;
  long total_timesteps = 3'000'000;
  std::uint64_t seed = 0;
  ExplorationMode exploration_mode = ExplorationMode::BernoulliHeads;
  int noise_resample_every = 4;
  // Stored and round-tripped only; Bernoulli heads have no state-dependent
  // noise.
  bool use_sde = true;
  bool normalize_advantage = true;
  bool normalize_observations = true;
  double adam_epsilon = 1e-8;
  int eval_every = 10;        // updates between best-checkpoint evaluations
  int eval_episodes = 20;
  int checkpoint_every = 50;  // updates between periodic checkpoints

  void validate() const;
};

// One rollout of n_steps transitions. Observations are stored already
// normalized, as the policy saw them.
struct RolloutBuffer {
  RolloutBuffer() = default;
  RolloutBuffer(int capacity, int observation_size);

  void add(std::span<const double> normalized_obs, const HeadArray& action,
           double log_prob, double value, double reward, bool done);
  bool full() const { return size == capacity; }
  void clear() { size = 0; }

  int capacity = 0;
  int size = 0;
  Eigen::MatrixXd observations;  // observation_size x capacity
  std::vector<HeadArray> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  double bootstrap_value = 0.0;  // V of the state after the last transition
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// dones[t] marks that the episode ended with transition t, so neither the
// next value nor later advantages leak across the boundary.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones,
                      double bootstrap_value, double gamma, double lambda);

// exp(new - old) with the exponent clamped to [-30, 30].
double ppo_ratio(double log_prob_new, double log_prob_old);

// -mean(min(r * A, clip(r, 1 - eps, 1 + eps) * A)).
double clipped_policy_loss(std::span<const double> ratios,
                           std::span<const double> advantages,
                           double clip_range);

// Derivative of the per-sample clipped objective w.r.t. the new log-prob.
double clipped_objective_grad(double log_prob_new, double log_prob_old,
                              double advantage, double clip_range);

struct Minibatch {
  Eigen::MatrixXd observations;  // observation_size x B, normalized
  std::vector<HeadArray> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;  // normalized if configured
  std::vector<double> returns;

  std::size_t size() const { return old_log_probs.size(); }
};

Minibatch gather_minibatch(const RolloutBuffer& buffer, const GaeResult& gae,
                           std::span<const std::size_t> indices,
                           bool normalize_advantage);

struct PolicyGradients {
  std::vector<double> actor;
  std::vector<double> critic;
  std::vector<double> log_std;

  explicit PolicyGradients(const PolicyParams& params);
  double norm() const;
  void scale(double factor);
};

struct LossTerms {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double ratio_mean = 0.0;
  double approx_kl = 0.0;
};

// total = policy_loss + vf_coef * value_loss - ent_coef * entropy.
// Writes dTotal/dParams into `grads` when non-null.
LossTerms minibatch_loss(const PolicyParams& params, const Minibatch& batch,
                         const TrainConfig& config, PolicyGradients* grads);

// Scales gradients so their global L2 norm is at most `max_norm`; returns
// the norm before clipping.
double clip_grad_norm(PolicyGradients& grads, double max_norm);

class AdamOptimizer {
 public:
  AdamOptimizer(const PolicyParams& params, double learning_rate,
                double epsilon = 1e-8, double beta1 = 0.9,
                double beta2 = 0.999);

  void step(PolicyParams& params, const PolicyGradients& grads);
  long steps() const { return t_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  void apply(std::span<double> p, std::span<const double> g, Moments& mom);

  double lr_, eps_, beta1_, beta2_;
  long t_ = 0;
  Moments actor_, critic_, log_std_;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double ratio_mean = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;  // mean pre-clip norm
  int minibatches = 0;
  bool aborted = false;
  std::string diagnostics;
};

// n_epochs passes over shuffled minibatches. On a non-finite loss the
// parameters and optimizer are restored and `aborted` is set.
UpdateStats ppo_update(PolicyParams& params, AdamOptimizer& optimizer,
                       const RolloutBuffer& buffer, const TrainConfig& config,
                       Rng& shuffle_rng);

// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace loader_rl

#endif  // LOADER_RL_PPO_HPP_
