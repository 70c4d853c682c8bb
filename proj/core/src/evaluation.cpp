#include "loader_rl/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace loader_rl {

PolicyFn greedy_policy(const PolicyParams& params, const EnvConfig& config) {
  return [params, config](const Observation& obs) {
    return greedy_action(policy_forward(params, obs, config).logits);
  };
}

PolicyFn oracle_policy(const OracleConfig& oracle, const EnvConfig& config) {
  return [oracle, config](const Observation& obs) {
    return scripted_policy(obs, oracle, config);
  };
}

bool is_degenerate_heading(double heading, double threshold) {
  return std::abs(std::sin(heading)) < threshold ||
         std::abs(std::cos(heading)) < threshold;
}

EpisodeSummary run_episode(const EnvConfig& config, EnvState env,
                           const PolicyFn& policy, EpisodeTrace* trace,
                           const std::string& config_digest) {
  EpisodeSummary summary;
  summary.heading = env.vehicle.heading;
  summary.degenerate = is_degenerate_heading(env.vehicle.heading);
  if (trace) {
    trace->meta = make_trace_meta(env, config, config_digest);
    trace->rows.clear();
  }
  Observation obs = build_observation(env);
  while (!env.done) {
    const Action action = policy(obs);
    const StepResult result = step(env, action, config);
    summary.total_reward += result.reward.total;
    if (trace) trace->rows.push_back(make_trace_row(env, action, result));
    obs = result.observation;
  }
  summary.outcome = env.outcome;
  summary.steps = env.step_count;
  summary.stop_error = distance_to_target(env);
  return summary;
}

EpisodeSummary run_episode(const EnvConfig& config, std::uint64_t seed,
                           const PolicyFn& policy, EpisodeTrace* trace,
                           const std::string& config_digest) {
  EpisodeSummary s =
      run_episode(config, reset(config, seed).first, policy, trace, config_digest);
  s.seed = seed;
  return s;
}

std::vector<std::uint64_t> episode_seeds(std::uint64_t seed, int count) {
  Rng rng = Rng::stream(seed, "eval");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(rng.next_u64());
  return seeds;
}

namespace {

BucketStats summarize(const std::vector<const EpisodeSummary*>& eps) {
  BucketStats b;
  b.episodes = static_cast<int>(eps.size());
  if (eps.empty()) return b;
  const double n = static_cast<double>(eps.size());
  int successes = 0;
  for (const auto* e : eps) {
    b.reward_mean += e->total_reward;
    b.stop_error_mean += e->stop_error;
    if (e->outcome == Outcome::Success) ++successes;
  }
  b.reward_mean /= n;
  b.stop_error_mean /= n;
  b.success_rate = successes / n;
  for (const auto* e : eps) {
    const double d = e->total_reward - b.reward_mean;
    b.reward_variance += d * d;
  }
  b.reward_variance /= n;
  return b;
}

}  // namespace

EvalReport evaluate(const EnvConfig& config, const PolicyFn& policy,
                    int episodes, std::uint64_t seed) {
  if (episodes <= 0)
    throw std::invalid_argument("evaluate: episode count must be > 0");
  EvalReport report;
  for (std::uint64_t s : episode_seeds(seed, episodes)) {
    report.episodes.push_back(run_episode(config, s, policy));
  }
  std::vector<const EpisodeSummary*> all, regular, degenerate;
  for (const auto& e : report.episodes) {
    all.push_back(&e);
    (e.degenerate ? degenerate : regular).push_back(&e);
  }
  report.all = summarize(all);
  report.regular = summarize(regular);
  report.degenerate = summarize(degenerate);
  return report;
}

}  // namespace loader_rl
