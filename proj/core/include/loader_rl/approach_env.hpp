#ifndef LOADER_RL_APPROACH_ENV_HPP_
#define LOADER_RL_APPROACH_ENV_HPP_

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "loader_rl/rng.hpp"
#include "loader_rl/vehicle.hpp"

namespace loader_rl {

// How the lift shaping term is evaluated.
//   GoalProgress: scale * (min(c_l, goal) - min(p_l, goal))
//   Literal:      p_l - goal * m_l * c_l, as printed in the reward listing
enum class LiftTermMode { GoalProgress, Literal };

std::string_view to_string(LiftTermMode mode);

struct EnvConfig {
  double target_distance = 5.0;      // m
  double vicinity = 1.5;             // m
  double speed_threshold = 0.1;      // m/s
  double lift_goal_frac = 0.95;
  double out_of_range_radius = 10.0;  // m from the episode start
  double max_episode_time = 15.0;     // s
  double time_penalty = 1e-4;         // per accumulated step
  double lift_reward_scale = 5.0 / 0.45;
  double dt = 1.0 / 50.0;
  double lift_start_mean = 0.5;
  double lift_start_jitter = 0.03;
  LiftTermMode lift_term = LiftTermMode::GoalProgress;
  // appends a constant 0 to the policy input (5-D observation experiments)
  bool observation_placeholder = false;
  VehicleParams vehicle;

  void validate() const;
  // number of steps after which the time-limit flag fires
  int max_steps() const;
  int observation_size() const { return observation_placeholder ? 5 : 4; }
};

struct Position2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position2&, const Position2&) = default;
};

using Action = Controls;

// Distances to the target are absolute values, so both are >= 0 whatever
// the heading.
struct Observation {
  double rel_x = 0.0;
  double rel_y = 0.0;
  double speed = 0.0;
  double lift = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

enum class Outcome { Running, Success, OutOfRange, Timeout };

std::string_view to_string(Outcome outcome);
Outcome outcome_from_string(std::string_view text);

struct RewardBreakdown {
  double progress_term = 0.0;
  double lift_term = 0.0;
  double time_term = 0.0;
  double terminal_term = 0.0;
  double total = 0.0;
  bool done = false;
  Outcome outcome = Outcome::Running;
};

struct TerminationFlags {
  bool out_of_range = false;
  bool timeout = false;
};

struct RewardInputs {
  double prev_distance = 0.0;
  double curr_distance = 0.0;
  double prev_lift = 0.0;
  double curr_lift = 0.0;
  double speed = 0.0;
  long step_count = 1;
  TerminationFlags flags;
};

struct EnvState {
  VehicleState vehicle;
  Position2 target;
  Position2 start;
  long step_count = 0;
  double prev_distance = 0.0;
  double prev_lift = 0.0;
  bool done = false;
  Outcome outcome = Outcome::Running;
  Rng rng;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepResult {
  Observation observation;
  RewardBreakdown reward;
  bool done = false;
};

Position2 target_from_heading(Position2 start, double heading,
                              double distance);

// Episode start with an explicit heading and lift; `reset` draws both.
EnvState initial_state(const EnvConfig& config, double heading, double lift,
                       Rng rng = Rng());

// Heading ~ U[0, 2pi), lift ~ mean + U[-jitter, jitter], vehicle at the origin
// moving at cruise speed.
std::pair<EnvState, Observation> reset(const EnvConfig& config,
                                       std::uint64_t seed);

Observation build_observation(const EnvState& env);
double distance_to_target(const EnvState& env);

// Policy input vector, optionally with the constant placeholder appended.
std::vector<double> observation_features(const Observation& obs,
                                         const EnvConfig& config);

// Reward for one transition. Termination flags win over success, success
// over shaping; terminal steps pay exactly -1 or +1.
RewardBreakdown compute_reward(const RewardInputs& in,
                               const EnvConfig& config);

// Applies the vehicle state the plant produced for this step: computes
// flags and reward, updates bookkeeping. Shared by `step` and the
// deployment emulator. Throws IllegalStateError when the episode is done.
StepResult advance(EnvState& env, const VehicleState& next,
                   const EnvConfig& config);

// One environment step with the ideal brake model.
StepResult step(EnvState& env, Action action, const EnvConfig& config);

// Owning convenience wrapper around the functional API.
class ApproachEnv {
 public:
  explicit ApproachEnv(EnvConfig config);

  Observation reset(std::uint64_t seed);
  StepResult step(Action action);

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }

 private:
  EnvConfig config_;
  EnvState state_;
};

}  // namespace loader_rl

#endif  // LOADER_RL_APPROACH_ENV_HPP_
