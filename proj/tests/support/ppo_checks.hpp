#ifndef LOADER_RL_TESTS_PPO_CHECKS_HPP_
#define LOADER_RL_TESTS_PPO_CHECKS_HPP_

#include <cstdint>
#include <vector>

#include "loader_rl/policy.hpp"
#include "loader_rl/ppo.hpp"

namespace loader_rl::ppo_checks {

// Random policy plus a random batch whose old log-probs sit at a random
// offset from the current ones, so some ratios land outside the clip range.
struct Fixture {
  PolicyParams params;
  RolloutBuffer buffer;
  GaeResult gae;
  std::vector<std::size_t> indices;
  TrainConfig config;
};

Fixture make_fixture(std::uint64_t seed, int batch, ExplorationMode mode);

// |minibatch_loss - independent scalar loss|, Bernoulli heads only.
double scalar_loss_error(const Fixture& f);

struct GradCheck {
  double relative_error = 0.0;  // ||analytic - fd|| / max(||analytic||, ||fd||)
  double analytic_norm = 0.0;
  int clipped_samples = 0;      // samples whose ratio lies outside the clip range
};

// Central finite differences (step h) of the total loss over every actor,
// critic and log-std parameter.
GradCheck gradient_check(const Fixture& f, double h = 1e-5);

}  // namespace loader_rl::ppo_checks

#endif  // LOADER_RL_TESTS_PPO_CHECKS_HPP_
