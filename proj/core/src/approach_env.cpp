#include "loader_rl/approach_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "loader_rl/errors.hpp"

namespace loader_rl {

std::string_view to_string(LiftTermMode mode) {
  return mode == LiftTermMode::Literal ? "literal" : "goal_progress";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Running: return "running";
    case Outcome::Success: return "success";
    case Outcome::OutOfRange: return "out_of_range";
    case Outcome::Timeout: return "timeout";
  }
  return "running";
}

Outcome outcome_from_string(std::string_view text) {
  if (text == "running") return Outcome::Running;
  if (text == "success") return Outcome::Success;
  if (text == "out_of_range") return Outcome::OutOfRange;
  if (text == "timeout") return Outcome::Timeout;
  throw FormatError("unknown outcome '" + std::string(text) + "'");
}

void EnvConfig::validate() const {
  vehicle.validate();
  if (!(vicinity > 0.0 && vicinity < target_distance &&
        target_distance < out_of_range_radius))
    throw std::invalid_argument(
        "env: require 0 < vicinity < target_distance < out_of_range_radius");
  if (!(speed_threshold > 0.0 && speed_threshold < vehicle.cruise_speed))
    throw std::invalid_argument(
        "env: require 0 < speed_threshold < vehicle.cruise_speed");
  if (!(lift_goal_frac > 0.0 && lift_goal_frac < 1.0))
    throw std::invalid_argument("env: lift_goal_frac must be in (0, 1)");
  if (!(dt > 0.0)) throw std::invalid_argument("env: dt must be > 0");
  if (!(max_episode_time >= dt))
    throw std::invalid_argument("env: max_episode_time must be >= dt");
  if (!(time_penalty >= 0.0))
    throw std::invalid_argument("env: time_penalty must be >= 0");
  if (!(lift_reward_scale >= 0.0))
    throw std::invalid_argument("env: lift_reward_scale must be >= 0");
  if (!(lift_start_jitter >= 0.0))
    throw std::invalid_argument("env: lift_start_jitter must be >= 0");
  if (!(lift_start_mean - lift_start_jitter >= vehicle.lift_min &&
        lift_start_mean + lift_start_jitter <= vehicle.lift_max))
    throw std::invalid_argument("env: lift start range outside lift limits");
}

int EnvConfig::max_steps() const {
  return static_cast<int>(std::llround(max_episode_time / dt));
}

Position2 target_from_heading(Position2 start, double heading,
                              double distance) {
  return {start.x + distance * std::sin(heading),
          start.y + distance * std::cos(heading)};
}

EnvState initial_state(const EnvConfig& config, double heading, double lift,
                       Rng rng) {
  EnvState env;
  env.vehicle.heading = heading;
  env.vehicle.speed = config.vehicle.cruise_speed;
  env.vehicle.lift = lift;
  env.start = {0.0, 0.0};
  env.target = target_from_heading(env.start, heading, config.target_distance);
  env.prev_distance = config.target_distance;
  env.prev_lift = lift;
  env.rng = rng;
  return env;
}

std::pair<EnvState, Observation> reset(const EnvConfig& config,
                                       std::uint64_t seed) {
  Rng rng(seed);
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double lift = config.lift_start_mean +
                      rng.uniform(-config.lift_start_jitter,
                                  config.lift_start_jitter);
  EnvState env = initial_state(config, heading, lift, rng);
  return {env, build_observation(env)};
}

Observation build_observation(const EnvState& env) {
  return {std::abs(env.target.x - env.vehicle.x),
          std::abs(env.target.y - env.vehicle.y), env.vehicle.speed,
          env.vehicle.lift};
}

double distance_to_target(const EnvState& env) {
  return std::hypot(env.target.x - env.vehicle.x,
                    env.target.y - env.vehicle.y);
}

std::vector<double> observation_features(const Observation& obs,
                                         const EnvConfig& config) {
  std::vector<double> f{obs.rel_x, obs.rel_y, obs.speed, obs.lift};
  if (config.observation_placeholder) f.push_back(0.0);
  return f;
}

RewardBreakdown compute_reward(const RewardInputs& in,
                               const EnvConfig& config) {
  RewardBreakdown r;
  if (in.flags.out_of_range || in.flags.timeout) {
    r.terminal_term = -1.0;
    r.total = -1.0;
    r.done = true;
    r.outcome = in.flags.out_of_range ? Outcome::OutOfRange : Outcome::Timeout;
    return r;
  }
  if (in.curr_distance < config.vicinity &&
      in.speed < config.speed_threshold &&
      in.curr_lift > config.lift_goal_frac * config.vehicle.lift_max) {
    r.terminal_term = 1.0;
    r.total = 1.0;
    r.done = true;
    r.outcome = Outcome::Success;
    return r;
  }
  const double goal = config.lift_goal_frac * config.vehicle.lift_max;
  r.progress_term = in.prev_distance - in.curr_distance;
  if (config.lift_term == LiftTermMode::Literal) {
    r.lift_term = in.prev_lift - goal * in.curr_lift;
  } else {
    r.lift_term = config.lift_reward_scale *
                  (std::min(in.curr_lift, goal) - std::min(in.prev_lift, goal));
  }
  r.time_term = -config.time_penalty * static_cast<double>(in.step_count);
  r.total = r.progress_term + r.lift_term + r.time_term;
  return r;
}

StepResult advance(EnvState& env, const VehicleState& next,
                   const EnvConfig& config) {
  if (env.done)
    throw IllegalStateError("step called on a finished episode");
  env.vehicle = next;
  env.step_count += 1;

  RewardInputs in;
  in.prev_distance = env.prev_distance;
  in.curr_distance = distance_to_target(env);
  in.prev_lift = env.prev_lift;
  in.curr_lift = next.lift;
  in.speed = next.speed;
  in.step_count = env.step_count;
  in.flags.out_of_range =
      std::hypot(next.x - env.start.x, next.y - env.start.y) >
      config.out_of_range_radius;
  in.flags.timeout = env.step_count >= config.max_steps();

  StepResult result;
  result.reward = compute_reward(in, config);
  result.done = result.reward.done;
  result.observation = build_observation(env);

  env.prev_distance = in.curr_distance;
  env.prev_lift = in.curr_lift;
  env.done = result.done;
  env.outcome = result.reward.outcome;
  return result;
}

StepResult step(EnvState& env, Action action, const EnvConfig& config) {
  if (env.done)
    throw IllegalStateError("step called on a finished episode");
  const VehicleState next = step_vehicle(env.vehicle, action, config.dt,
                                         config.vehicle, BrakeModel::Ideal);
  return advance(env, next, config);
}

ApproachEnv::ApproachEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  state_.done = true;
}

Observation ApproachEnv::reset(std::uint64_t seed) {
  auto [state, obs] = loader_rl::reset(config_, seed);
  state_ = state;
  return obs;
}

StepResult ApproachEnv::step(Action action) {
  return loader_rl::step(state_, action, config_);
}

}  // namespace loader_rl
