#include "loader_rl/ppo.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace loader_rl {
namespace {

constexpr double kLogRatioClamp = 30.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("train.learning_rate must be > 0");
  if (n_steps <= 0) throw std::invalid_argument("train.n_steps must be > 0");
  if (batch_size <= 0) throw std::invalid_argument("train.batch_size must be > 0");
  if (n_epochs <= 0) throw std::invalid_argument("train.n_epochs must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("train.gamma must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("train.gae_lambda must be in [0, 1]");
  if (!(clip_range > 0.0))
    throw std::invalid_argument("train.clip_range must be > 0");
  if (!(ent_coef >= 0.0)) throw std::invalid_argument("train.ent_coef must be >= 0");
  if (!(vf_coef >= 0.0)) throw std::invalid_argument("train.vf_coef must be >= 0");
  if (!(max_grad_norm > 0.0))
    throw std::invalid_argument("train.max_grad_norm must be > 0");
  if (n_envs != 1)
    throw std::invalid_argument("train.n_envs: only a single environment is supported");
  if ((static_cast<long>(n_steps) * n_envs) % batch_size != 0)
    throw std::invalid_argument("train.batch_size must divide n_steps * n_envs");
  if (total_timesteps <= 0)
    throw std::invalid_argument("train.total_timesteps must be > 0");
  if (noise_resample_every <= 0)
    throw std::invalid_argument("train.noise_resample_every must be > 0");
  if (!(adam_epsilon > 0.0))
    throw std::invalid_argument("train.adam_epsilon must be > 0");
  if (eval_every <= 0 || eval_episodes <= 0 || checkpoint_every <= 0)
    throw std::invalid_argument(
        "train.eval_every, eval_episodes and checkpoint_every must be > 0");
}

RolloutBuffer::RolloutBuffer(int capacity_, int observation_size)
    : capacity(capacity_),
      observations(observation_size, capacity_),
      actions(static_cast<std::size_t>(capacity_)),
      log_probs(static_cast<std::size_t>(capacity_)),
      values(static_cast<std::size_t>(capacity_)),
      rewards(static_cast<std::size_t>(capacity_)),
      dones(static_cast<std::size_t>(capacity_)) {}

void RolloutBuffer::add(std::span<const double> normalized_obs,
                        const HeadArray& action, double log_prob, double value,
                        double reward, bool done) {
  if (full()) throw std::length_error("RolloutBuffer::add: buffer is full");
  if (static_cast<Eigen::Index>(normalized_obs.size()) != observations.rows())
    throw std::invalid_argument("RolloutBuffer::add: observation size mismatch");
  if (!std::isfinite(log_prob))
    throw std::invalid_argument("RolloutBuffer::add: non-finite log_prob");
  const auto i = static_cast<std::size_t>(size);
  for (std::size_t k = 0; k < normalized_obs.size(); ++k)
    observations(static_cast<Eigen::Index>(k), size) = normalized_obs[k];
  actions[i] = action;
  log_probs[i] = log_prob;
  values[i] = value;
  rewards[i] = reward;
  dones[i] = done ? 1 : 0;
  ++size;
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones,
                      double bootstrap_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (n == 0 || values.size() != n || dones.size() != n)
    throw std::invalid_argument(
        "compute_gae: rewards, values and dones must have equal non-zero length");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_value = k + 1 < n ? values[k + 1] : bootstrap_value;
    const double not_done = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * not_done - values[k];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
  }
  return out;
}

double ppo_ratio(double log_prob_new, double log_prob_old) {
  return std::exp(std::clamp(log_prob_new - log_prob_old, -kLogRatioClamp,
                             kLogRatioClamp));
}

double clipped_policy_loss(std::span<const double> ratios,
                           std::span<const double> advantages,
                           double clip_range) {
  if (ratios.empty())
    throw std::invalid_argument("clipped_policy_loss: empty batch");
  if (ratios.size() != advantages.size())
    throw std::invalid_argument("clipped_policy_loss: length mismatch");
  if (!(clip_range > 0.0))
    throw std::invalid_argument("clipped_policy_loss: clip_range must be > 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double r = ratios[i];
    const double a = advantages[i];
    const double clipped = std::clamp(r, 1.0 - clip_range, 1.0 + clip_range);
    sum += std::min(r * a, clipped * a);
  }
  return -sum / static_cast<double>(ratios.size());
}

double clipped_objective_grad(double log_prob_new, double log_prob_old,
                              double advantage, double clip_range) {
  const double log_ratio = log_prob_new - log_prob_old;
  if (std::abs(log_ratio) > kLogRatioClamp) return 0.0;
  const double r = std::exp(log_ratio);
  const double clipped = std::clamp(r, 1.0 - clip_range, 1.0 + clip_range);
  // the clipped branch is constant in the parameters
  return r * advantage <= clipped * advantage ? r * advantage : 0.0;
}

Minibatch gather_minibatch(const RolloutBuffer& buffer, const GaeResult& gae,
                           std::span<const std::size_t> indices,
                           bool normalize_advantage) {
  Minibatch mb;
  const auto b = static_cast<Eigen::Index>(indices.size());
  mb.observations.resize(buffer.observations.rows(), b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const std::size_t i = indices[static_cast<std::size_t>(j)];
    mb.observations.col(j) = buffer.observations.col(static_cast<Eigen::Index>(i));
    mb.actions.push_back(buffer.actions[i]);
    mb.old_log_probs.push_back(buffer.log_probs[i]);
    mb.advantages.push_back(gae.advantages[i]);
    mb.returns.push_back(gae.returns[i]);
  }
  if (normalize_advantage && mb.advantages.size() > 1) {
    const double n = static_cast<double>(mb.advantages.size());
    const double mean =
        std::accumulate(mb.advantages.begin(), mb.advantages.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : mb.advantages) ss += (a - mean) * (a - mean);
    const double stddev = std::sqrt(ss / (n - 1.0));
    for (double& a : mb.advantages) a = (a - mean) / (stddev + 1e-8);
  }
  return mb;
}

PolicyGradients::PolicyGradients(const PolicyParams& params)
    : actor(params.actor.params().size(), 0.0),
      critic(params.critic.params().size(), 0.0),
      log_std(params.log_std.size(), 0.0) {}

double PolicyGradients::norm() const {
  double ss = 0.0;
  for (const auto* v : {&actor, &critic, &log_std})
    for (double g : *v) ss += g * g;
  return std::sqrt(ss);
}

void PolicyGradients::scale(double factor) {
  for (auto* v : {&actor, &critic, &log_std})
    for (double& g : *v) g *= factor;
}

LossTerms minibatch_loss(const PolicyParams& params, const Minibatch& batch,
                         const TrainConfig& config, PolicyGradients* grads) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("minibatch_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool gaussian = params.mode == ExplorationMode::ContinuousThreshold;

  Mlp::Cache actor_cache;
  Mlp::Cache critic_cache;
  const Eigen::MatrixXd out =
      params.actor.forward(batch.observations, grads ? &actor_cache : nullptr);
  const Eigen::MatrixXd values =
      params.critic.forward(batch.observations, grads ? &critic_cache : nullptr);

  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(kActionHeads, static_cast<Eigen::Index>(n));
  Eigen::MatrixXd d_value = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(n));
  std::vector<double> d_log_std(params.log_std.size(), 0.0);

  LossTerms t;
  std::vector<double> ratios(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const HeadArray head{out(0, col), out(1, col)};
    const HeadArray& act = batch.actions[i];
    double log_prob = 0.0;
    double entropy = 0.0;
    if (gaussian) {
      log_prob = gaussian_log_prob(head, params.log_std, act);
    } else {
      log_prob = bernoulli_log_prob(head, {act[0] > 0.5, act[1] > 0.5});
      entropy = bernoulli_entropy(head);
    }
    const double old = batch.old_log_probs[i];
    const double r = ppo_ratio(log_prob, old);
    ratios[i] = r;
    t.ratio_mean += r * inv_n;
    t.approx_kl += ((r - 1.0) - (log_prob - old)) * inv_n;
    if (std::abs(r - 1.0) > config.clip_range) t.clip_fraction += inv_n;
    t.entropy += entropy * inv_n;

    const double v = values(0, col);
    const double err = v - batch.returns[i];
    t.value_loss += err * err * inv_n;

    if (!grads) continue;
    // d(policy_loss)/d(log_prob) = -inv_n * d(objective)/d(log_prob)
    const double g_lp = -inv_n * clipped_objective_grad(log_prob, old,
                                                        batch.advantages[i],
                                                        config.clip_range);
    for (int h = 0; h < kActionHeads; ++h) {
      if (gaussian) {
        const double sigma = std::exp(params.log_std[static_cast<std::size_t>(h)]);
        const double z = (act[static_cast<std::size_t>(h)] - head[static_cast<std::size_t>(h)]) / sigma;
        d_out(h, col) += g_lp * z / sigma;
        d_log_std[static_cast<std::size_t>(h)] += g_lp * (z * z - 1.0);
      } else {
        const double l = head[static_cast<std::size_t>(h)];
        const double p = sigmoid(l);
        const double a = act[static_cast<std::size_t>(h)] > 0.5 ? 1.0 : 0.0;
        d_out(h, col) += g_lp * (a - p);
        // entropy gradient: dH/dl = -l p (1 - p)
        d_out(h, col) += -config.ent_coef * inv_n * (-l * p * (1.0 - p));
      }
    }
    d_value(0, col) = config.vf_coef * 2.0 * err * inv_n;
  }
  if (gaussian) {
    t.entropy = gaussian_entropy(params.log_std);
    for (double& g : d_log_std) g += -config.ent_coef;
  }
  std::vector<double> adv(batch.advantages.begin(), batch.advantages.end());
  t.policy_loss = clipped_policy_loss(ratios, adv, config.clip_range);
  t.total = t.policy_loss + config.vf_coef * t.value_loss -
            config.ent_coef * t.entropy;

  if (grads) {
    std::fill(grads->actor.begin(), grads->actor.end(), 0.0);
    std::fill(grads->critic.begin(), grads->critic.end(), 0.0);
    params.actor.backward(actor_cache, d_out, grads->actor);
    params.critic.backward(critic_cache, d_value, grads->critic);
    grads->log_std = d_log_std;
  }
  return t;
}

double clip_grad_norm(PolicyGradients& grads, double max_norm) {
  const double norm = grads.norm();
  if (norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

AdamOptimizer::AdamOptimizer(const PolicyParams& params, double learning_rate,
                             double epsilon, double beta1, double beta2)
    : lr_(learning_rate), eps_(epsilon), beta1_(beta1), beta2_(beta2) {
  actor_.m.assign(params.actor.params().size(), 0.0);
  actor_.v = actor_.m;
  critic_.m.assign(params.critic.params().size(), 0.0);
  critic_.v = critic_.m;
  log_std_.m.assign(params.log_std.size(), 0.0);
  log_std_.v = log_std_.m;
}

void AdamOptimizer::apply(std::span<double> p, std::span<const double> g,
                          Moments& mom) {
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < p.size(); ++i) {
    mom.m[i] = beta1_ * mom.m[i] + (1.0 - beta1_) * g[i];
    mom.v[i] = beta2_ * mom.v[i] + (1.0 - beta2_) * g[i] * g[i];
    const double m_hat = mom.m[i] / bc1;
    const double v_hat = mom.v[i] / bc2;
    p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

void AdamOptimizer::step(PolicyParams& params, const PolicyGradients& grads) {
  ++t_;
  apply(params.actor.params(), grads.actor, actor_);
  apply(params.critic.params(), grads.critic, critic_);
  apply(params.log_std, grads.log_std, log_std_);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  return idx;
}

UpdateStats ppo_update(PolicyParams& params, AdamOptimizer& optimizer,
                       const RolloutBuffer& buffer, const TrainConfig& config,
                       Rng& shuffle_rng) {
  if (!buffer.full() || buffer.size == 0)
    throw std::invalid_argument("ppo_update: rollout buffer is not full");
  const GaeResult gae = compute_gae(
      std::span<const double>(buffer.rewards.data(), static_cast<std::size_t>(buffer.size)),
      std::span<const double>(buffer.values.data(), static_cast<std::size_t>(buffer.size)),
      std::span<const std::uint8_t>(buffer.dones.data(), static_cast<std::size_t>(buffer.size)),
      buffer.bootstrap_value, config.gamma, config.gae_lambda);

  const PolicyParams params_before = params;
  const AdamOptimizer optimizer_before = optimizer;
  UpdateStats stats;
  PolicyGradients grads(params);
  const auto n = static_cast<std::size_t>(buffer.size);
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled_indices(n, shuffle_rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const Minibatch mb = gather_minibatch(
          buffer, gae, std::span<const std::size_t>(order.data() + start, len),
          config.normalize_advantage);
      const LossTerms loss = minibatch_loss(params, mb, config, &grads);
      const double gnorm = grads.norm();
      if (!std::isfinite(loss.total) || !std::isfinite(gnorm)) {
        params = params_before;
        optimizer = optimizer_before;
        UpdateStats failed;
        failed.aborted = true;
        failed.diagnostics = fmt::format(
            "non-finite loss at epoch {} minibatch {}: total={} policy={} "
            "value={} grad_norm={}",
            epoch, start / batch, loss.total, loss.policy_loss,
            loss.value_loss, gnorm);
        return failed;
      }
      clip_grad_norm(grads, config.max_grad_norm);
      optimizer.step(params, grads);

      stats.policy_loss += loss.policy_loss;
      stats.value_loss += loss.value_loss;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      stats.ratio_mean += loss.ratio_mean;
      stats.approx_kl += loss.approx_kl;
      stats.grad_norm += gnorm;
      ++stats.minibatches;
    }
  }
  const double k = 1.0 / static_cast<double>(stats.minibatches);
  stats.policy_loss *= k;
  stats.value_loss *= k;
  stats.entropy *= k;
  stats.clip_fraction *= k;
  stats.ratio_mean *= k;
  stats.approx_kl *= k;
  stats.grad_norm *= k;
  return stats;
}

}  // namespace loader_rl
