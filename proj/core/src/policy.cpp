#include "loader_rl/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace loader_rl {

std::string_view to_string(ExplorationMode mode) {
  return mode == ExplorationMode::ContinuousThreshold ? "continuous_threshold"
                                                      : "bernoulli_heads";
}

PolicyParams make_policy(int observation_size, ExplorationMode mode,
                         Rng& init_rng) {
  PolicyParams p;
  p.mode = mode;
  p.actor = Mlp({observation_size, kHiddenUnits, kHiddenUnits, kActionHeads});
  p.critic = Mlp({observation_size, kHiddenUnits, kHiddenUnits, 1});
  p.actor.init_orthogonal(init_rng, std::numbers::sqrt2, 0.01);
  p.critic.init_orthogonal(init_rng, std::numbers::sqrt2, 1.0);
  if (mode == ExplorationMode::ContinuousThreshold) {
    p.log_std.assign(kActionHeads, 0.0);
  }
  p.normalizer = ObsNormalizer(observation_size);
  return p;
}

PolicyOutput policy_forward_normalized(const PolicyParams& params,
                                       std::span<const double> normalized) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(normalized.size()), 1);
  for (std::size_t i = 0; i < normalized.size(); ++i)
    x(static_cast<Eigen::Index>(i), 0) = normalized[i];
  const Eigen::MatrixXd logits = params.actor.forward(x);
  const Eigen::MatrixXd value = params.critic.forward(x);
  return {{logits(0, 0), logits(1, 0)}, value(0, 0)};
}

PolicyOutput policy_forward(const PolicyParams& params,
                            std::span<const double> features) {
  for (double v : features) {
    if (!std::isfinite(v))
      throw std::invalid_argument("policy_forward: non-finite observation");
  }
  return policy_forward_normalized(params, params.normalizer.normalize(features));
}

PolicyOutput policy_forward(const PolicyParams& params, const Observation& obs,
                            const EnvConfig& config) {
  return policy_forward(params, observation_features(obs, config));
}

double log_sigmoid(double x) {
  // -softplus(-x), stable for large |x|
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double bernoulli_log_prob(const HeadArray& logits, Action action) {
  const bool on[kActionHeads] = {action.brake, action.lift_up};
  double lp = 0.0;
  for (int i = 0; i < kActionHeads; ++i) {
    lp += on[i] ? log_sigmoid(logits[i]) : log_sigmoid(-logits[i]);
  }
  return lp;
}

double bernoulli_entropy(const HeadArray& logits) {
  double h = 0.0;
  for (double l : logits) {
    const double p = 1.0 / (1.0 + std::exp(-l));
    h -= p * log_sigmoid(l) + (1.0 - p) * log_sigmoid(-l);
  }
  return h;
}

SampledAction sample_action(const HeadArray& logits, Rng& rng) {
  SampledAction s;
  bool on[kActionHeads];
  for (int i = 0; i < kActionHeads; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-logits[i]));
    on[i] = rng.uniform() < p;
    s.raw[i] = on[i] ? 1.0 : 0.0;
  }
  s.action = {on[0], on[1]};
  s.log_prob = bernoulli_log_prob(logits, s.action);
  return s;
}

Action greedy_action(const HeadArray& logits) {
  return {logits[0] > 0.0, logits[1] > 0.0};
}

double gaussian_log_prob(const HeadArray& mean, std::span<const double> log_std,
                         const HeadArray& sample) {
  double lp = 0.0;
  for (int i = 0; i < kActionHeads; ++i) {
    const double z = (sample[i] - mean[i]) / std::exp(log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) {
    h += 0.5 + 0.5 * std::log(2.0 * std::numbers::pi) + ls;
  }
  return h;
}

Action threshold_action(const HeadArray& sample) {
  // tanh squashing preserves the sign, so thresholding the raw sample suffices
  return {sample[0] > 0.0, sample[1] > 0.0};
}

SampledAction HeldNoiseSampler::sample(const HeadArray& mean,
                                       std::span<const double> log_std,
                                       Rng& rng) {
  if (calls_ % every_ == 0) {
    for (double& n : noise_) n = rng.normal();
  }
  ++calls_;
  SampledAction s;
  for (int i = 0; i < kActionHeads; ++i) {
    s.raw[i] = mean[i] + std::exp(log_std[i]) * noise_[i];
  }
  s.action = threshold_action(s.raw);
  s.log_prob = gaussian_log_prob(mean, log_std, s.raw);
  return s;
}

}  // namespace loader_rl
