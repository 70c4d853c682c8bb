#include "loader_rl/trainer.hpp"

#include <fmt/format.h>

#include <deque>
#include <limits>
#include <ostream>

#include "loader_rl/errors.hpp"
#include "loader_rl/evaluation.hpp"

namespace loader_rl {
namespace {

constexpr std::size_t kEpisodeWindow = 100;
constexpr int kMaxConsecutiveAborts = 10;

struct EpisodeRecord {
  double reward;
  long length;
  bool success;
};

}  // namespace

std::vector<std::string> metrics_columns() {
  return {"timestep",     "updates",     "ep_reward_mean", "ep_len_mean",
          "success_rate", "policy_loss", "value_loss",     "entropy",
          "clip_fraction", "ratio_mean"};
}

void write_metrics_header(std::ostream& os, const std::string& config_digest) {
  os << "# loader_rl-metrics v1\n# config_digest=" << config_digest << '\n';
  const auto cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

std::string format_metrics_row(const MetricsRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.timestep, r.updates,
                     r.ep_reward_mean, r.ep_len_mean, r.success_rate,
                     r.policy_loss, r.value_loss, r.entropy, r.clip_fraction,
                     r.ratio_mean);
}

TrainResult train(const RunConfig& config, const TrainHooks& hooks) {
  config.validate();
  const EnvConfig& env_cfg = config.env;
  const TrainConfig& tc = config.train;
  const std::string digest = config_digest(config);
  const std::string config_text = to_config_text(config);
  const std::uint64_t env_hash = env_config_hash(env_cfg);
  auto log = [&](const std::string& msg) {
    if (hooks.on_log) hooks.on_log(msg);
  };

  Rng init_rng = Rng::stream(tc.seed, "policy-init");
  Rng env_rng = Rng::stream(tc.seed, "env");
  Rng sampling_rng = Rng::stream(tc.seed, "sampling");
  Rng shuffle_rng = Rng::stream(tc.seed, "shuffle");
  const std::uint64_t selection_seed = derive_seed(tc.seed, "selection");

  const int obs_size = env_cfg.observation_size();
  PolicyParams params = make_policy(obs_size, tc.exploration_mode, init_rng);
  AdamOptimizer optimizer(params, tc.learning_rate, tc.adam_epsilon);
  RolloutBuffer buffer(tc.n_steps, obs_size);
  HeldNoiseSampler noise(tc.noise_resample_every);
  const bool gaussian = tc.exploration_mode == ExplorationMode::ContinuousThreshold;

  long timestep = 0;
  TrainResult result;
  auto snapshot = [&] {
    PolicyCheckpoint c;
    c.config_digest = digest;
    c.env_config_hash = env_hash;
    c.config_text = config_text;
    c.params = params;
    c.rng_state = env_rng.serialize() + "|" + sampling_rng.serialize() + "|" +
                  shuffle_rng.serialize();
    c.timesteps = static_cast<std::uint64_t>(timestep);
    return c;
  };
  auto emit = [&](const PolicyCheckpoint& c, CheckpointKind kind) {
    if (hooks.on_checkpoint) hooks.on_checkpoint(c, kind);
  };

  try {
    EnvState env = reset(env_cfg, env_rng.next_u64()).first;
    Observation obs = build_observation(env);
    double ep_reward = 0.0;
    std::deque<EpisodeRecord> recent;
    int consecutive_aborts = 0;

    while (timestep < tc.total_timesteps) {
      buffer.clear();
      for (int i = 0; i < tc.n_steps; ++i) {
        const std::vector<double> features = observation_features(obs, env_cfg);
        if (tc.normalize_observations) params.normalizer.update(features);
        const std::vector<double> x = params.normalizer.normalize(features);
        const PolicyOutput out = policy_forward_normalized(params, x);
        const SampledAction s = gaussian
                                    ? noise.sample(out.logits, params.log_std, sampling_rng)
                                    : sample_action(out.logits, sampling_rng);
        const StepResult step_result = step(env, s.action, env_cfg);
        buffer.add(x, s.raw, s.log_prob, out.value, step_result.reward.total,
                   step_result.done);
        ++timestep;
        ep_reward += step_result.reward.total;
        obs = step_result.observation;
        if (step_result.done) {
          recent.push_back({ep_reward, env.step_count, env.outcome == Outcome::Success});
          if (recent.size() > kEpisodeWindow) recent.pop_front();
          ep_reward = 0.0;
          env = reset(env_cfg, env_rng.next_u64()).first;
          obs = build_observation(env);
          noise.reset();
        }
      }
      buffer.bootstrap_value =
          policy_forward(params, observation_features(obs, env_cfg)).value;

      const UpdateStats stats = ppo_update(params, optimizer, buffer, tc, shuffle_rng);
      ++result.updates;
      if (stats.aborted) {
        ++result.aborted_updates;
        log("update " + std::to_string(result.updates) + " aborted: " + stats.diagnostics);
        if (++consecutive_aborts >= kMaxConsecutiveAborts)
          throw NumericalError("training diverged: " + stats.diagnostics);
      } else {
        consecutive_aborts = 0;
      }

      MetricsRow row;
      row.timestep = timestep;
      row.updates = result.updates;
      if (recent.empty()) {
        row.ep_reward_mean = std::numeric_limits<double>::quiet_NaN();
        row.ep_len_mean = std::numeric_limits<double>::quiet_NaN();
        row.success_rate = std::numeric_limits<double>::quiet_NaN();
      } else {
        const double n = static_cast<double>(recent.size());
        int successes = 0;
        for (const auto& e : recent) {
          row.ep_reward_mean += e.reward;
          row.ep_len_mean += static_cast<double>(e.length);
          if (e.success) ++successes;
        }
        row.ep_reward_mean /= n;
        row.ep_len_mean /= n;
        row.success_rate = successes / n;
      }
      row.policy_loss = stats.policy_loss;
      row.value_loss = stats.value_loss;
      row.entropy = stats.entropy;
      row.clip_fraction = stats.clip_fraction;
      row.ratio_mean = stats.ratio_mean;
      if (hooks.on_metrics) hooks.on_metrics(row);

      if (result.updates % tc.checkpoint_every == 0) {
        emit(snapshot(), CheckpointKind::Periodic);
      }
      if (result.updates % tc.eval_every == 0 || timestep >= tc.total_timesteps) {
        const EvalReport report = evaluate(env_cfg, greedy_policy(params, env_cfg),
                                           tc.eval_episodes, selection_seed);
        const bool better =
            report.all.success_rate > result.best_success_rate ||
            (report.all.success_rate == result.best_success_rate &&
             report.all.reward_mean > result.best_reward_mean);
        if (better) {
          result.best_success_rate = report.all.success_rate;
          result.best_reward_mean = report.all.reward_mean;
          result.best_checkpoint = snapshot();
          emit(result.best_checkpoint, CheckpointKind::Best);
          log(fmt::format("timestep {}: new best greedy success {:.3f}, reward {:.3f}",
                          timestep, report.all.success_rate, report.all.reward_mean));
        }
      }
    }
  } catch (...) {
    emit(snapshot(), CheckpointKind::Final);
    throw;
  }

  result.final_checkpoint = snapshot();
  emit(result.final_checkpoint, CheckpointKind::Final);
  return result;
}

}  // namespace loader_rl
