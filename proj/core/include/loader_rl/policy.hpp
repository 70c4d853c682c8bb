#ifndef LOADER_RL_POLICY_HPP_
#define LOADER_RL_POLICY_HPP_

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "loader_rl/approach_env.hpp"
#include "loader_rl/mlp.hpp"
#include "loader_rl/rng.hpp"

namespace loader_rl {

// BernoulliHeads: the actor emits two logits, one independent Bernoulli per
// binary control. ContinuousThreshold: the actor emits the means of a 2-D
// Gaussian (learned log std); a sample > 0 maps to 1, and exploration noise
// is held for a fixed number of steps.
enum class ExplorationMode { BernoulliHeads, ContinuousThreshold };

std::string_view to_string(ExplorationMode mode);

inline constexpr int kActionHeads = 2;
inline constexpr int kHiddenUnits = 64;

using HeadArray = std::array<double, kActionHeads>;

struct PolicyParams {
  ExplorationMode mode = ExplorationMode::BernoulliHeads;
  Mlp actor;   // obs -> 64 -> 64 -> 2
  Mlp critic;  // obs -> 64 -> 64 -> 1
  std::vector<double> log_std;  // ContinuousThreshold only
  ObsNormalizer normalizer;

  int observation_size() const { return actor.input_size(); }

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

// Orthogonal init: hidden gain sqrt(2), actor output gain 0.01, critic 1.
PolicyParams make_policy(int observation_size, ExplorationMode mode,
                         Rng& init_rng);

struct PolicyOutput {
  HeadArray logits{};  // Gaussian means in ContinuousThreshold mode
  double value = 0.0;
};

// Normalizes `features` with the frozen normalizer and evaluates both
// networks. Throws std::invalid_argument on non-finite input.
PolicyOutput policy_forward(const PolicyParams& params,
                            std::span<const double> features);
PolicyOutput policy_forward(const PolicyParams& params, const Observation& obs,
                            const EnvConfig& config);

// Same, for features that are already normalized.
PolicyOutput policy_forward_normalized(const PolicyParams& params,
                                       std::span<const double> normalized);

double log_sigmoid(double x);

// Sum of both heads' Bernoulli log-masses.
double bernoulli_log_prob(const HeadArray& logits, Action action);
double bernoulli_entropy(const HeadArray& logits);

struct SampledAction {
  Action action;
  double log_prob = 0.0;
  HeadArray raw{};  // the stored action: 0/1 per head, or the Gaussian sample
};

SampledAction sample_action(const HeadArray& logits, Rng& rng);

// Evaluation action: a head is on when its logit (or mean) is positive.
Action greedy_action(const HeadArray& logits);

double gaussian_log_prob(const HeadArray& mean, std::span<const double> log_std,
                         const HeadArray& sample);
double gaussian_entropy(std::span<const double> log_std);

// Gaussian sampler whose standard-normal noise is redrawn every
// `resample_every` calls.
class HeldNoiseSampler {
 public:
  explicit HeldNoiseSampler(int resample_every) : every_(resample_every) {}

  SampledAction sample(const HeadArray& mean, std::span<const double> log_std,
                       Rng& rng);
  void reset() { calls_ = 0; }

 private:
  int every_;
  int calls_ = 0;
  HeadArray noise_{};
};

Action threshold_action(const HeadArray& sample);

}  // namespace loader_rl

#endif  // LOADER_RL_POLICY_HPP_
