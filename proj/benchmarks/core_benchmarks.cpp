#include <benchmark/benchmark.h>

#include <vector>

#include "loader_rl/approach_env.hpp"
#include "loader_rl/emulator.hpp"
#include "loader_rl/evaluation.hpp"
#include "loader_rl/policy.hpp"
#include "loader_rl/ppo.hpp"

namespace loader_rl {
namespace {

void BM_EnvStep(benchmark::State& state) {
  const EnvConfig cfg;
  EnvState env = reset(cfg, 1).first;
  const Action a{false, true};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    if (env.done) env = reset(cfg, ++seed).first;
    benchmark::DoNotOptimize(step(env, a, cfg));
  }
}
BENCHMARK(BM_EnvStep);

void BM_PolicyForward(benchmark::State& state) {
  Rng rng(2);
  const PolicyParams p = make_policy(4, ExplorationMode::BernoulliHeads, rng);
  const std::vector<double> x{0.3, -1.2, 0.5, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(policy_forward_normalized(p, x));
}
BENCHMARK(BM_PolicyForward);

void BM_Gae(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> rewards(n), values(n);
  std::vector<std::uint8_t> dones(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = rng.uniform(-1, 1);
    values[i] = rng.uniform(-1, 1);
    dones[i] = rng.uniform() < 0.01;
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_gae(rewards, values, dones, 0.0, 0.99, 0.9));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gae)->Arg(512)->Arg(4096);

// One full update with the default hyperparameters: 512 samples, 20 epochs
// of 128-sample minibatches.
void BM_PpoUpdate(benchmark::State& state) {
  Rng rng(4);
  PolicyParams p = make_policy(4, ExplorationMode::BernoulliHeads, rng);
  const TrainConfig cfg;
  RolloutBuffer buffer(cfg.n_steps, 4);
  for (int i = 0; i < cfg.n_steps; ++i) {
    const std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
                                rng.uniform(-2, 2)};
    const PolicyOutput out = policy_forward_normalized(p, x);
    const SampledAction s = sample_action(out.logits, rng);
    buffer.add(x, s.raw, s.log_prob, out.value, rng.uniform(-1, 1), rng.uniform() < 0.01);
  }
  for (auto _ : state) {
    state.PauseTiming();
    PolicyParams params = p;
    AdamOptimizer opt(params, cfg.learning_rate);
    Rng shuffle(5);
    state.ResumeTiming();
    benchmark::DoNotOptimize(ppo_update(params, opt, buffer, cfg, shuffle));
  }
}
BENCHMARK(BM_PpoUpdate)->Unit(benchmark::kMillisecond);

void BM_EmulatedEpisode(benchmark::State& state) {
  const EnvConfig cfg;
  const PolicyFn policy = oracle_policy(OracleConfig{}, cfg);
  EmulationConfig emu;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_emulated_episode(policy, cfg, emu, ++seed));
}
BENCHMARK(BM_EmulatedEpisode)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace loader_rl

BENCHMARK_MAIN();
