#include "loader_rl/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "loader_rl/errors.hpp"

namespace loader_rl {

void OracleConfig::validate() const {
  if (!(brake_margin >= 0.0))
    throw std::invalid_argument("oracle.brake_margin must be >= 0");
}

Action scripted_policy(const Observation& obs, const OracleConfig& oracle,
                       const EnvConfig& config) {
  const double goal = config.lift_goal_frac * config.vehicle.lift_max;
  const double remaining = std::sqrt(obs.rel_x * obs.rel_x + obs.rel_y * obs.rel_y);
  const double stopping =
      obs.speed * obs.speed / (2.0 * config.vehicle.ideal_decel);
  Action a;
  a.lift_up = obs.lift <= goal;
  // once a stop is under way (speed below cruise) the brake stays on; the
  // absolute-valued observation cannot tell "before" from "past" the target
  a.brake = remaining <= stopping + oracle.brake_margin ||
            obs.speed < config.vehicle.cruise_speed;
  return a;
}

double reward_oracle(const EpisodeTrace& trace, const EnvConfig& config) {
  const double goal = config.lift_goal_frac * config.vehicle.lift_max;
  const long limit = std::lround(config.max_episode_time / config.dt);
  double prev_distance = trace.meta.initial_distance;
  double prev_lift = trace.meta.initial_lift;
  double total = 0.0;
  bool finished = false;

  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    if (finished)
      throw FormatError("reward_oracle: rows continue after a terminal step");
    if (row.step != static_cast<long>(i) + 1)
      throw FormatError("reward_oracle: expected step " + std::to_string(i + 1) +
                        ", found " + std::to_string(row.step));
    const double distance =
        std::sqrt(row.rel_x * row.rel_x + row.rel_y * row.rel_y);
    const double dx = row.x - trace.meta.start.x;
    const double dy = row.y - trace.meta.start.y;
    const bool out_of_range =
        std::sqrt(dx * dx + dy * dy) > config.out_of_range_radius;
    const bool out_of_time = row.step >= limit;

    double r = 0.0;
    if (out_of_range || out_of_time) {
      r = -1.0;
      finished = true;
    } else if (distance < config.vicinity && row.speed < config.speed_threshold &&
               row.lift > goal) {
      r = 1.0;
      finished = true;
    } else {
      double lift_part = 0.0;
      if (config.lift_term == LiftTermMode::Literal) {
        lift_part = prev_lift - goal * row.lift;
      } else {
        const double before = prev_lift < goal ? prev_lift : goal;
        const double after = row.lift < goal ? row.lift : goal;
        lift_part = config.lift_reward_scale * (after - before);
      }
      r = (prev_distance - distance) + lift_part -
          config.time_penalty * static_cast<double>(row.step);
    }
    total += r;
    prev_distance = distance;
    prev_lift = row.lift;
  }
  return total;
}

double max_reward_bound(const EnvConfig& config) {
  if (config.lift_term != LiftTermMode::GoalProgress)
    throw std::invalid_argument(
        "max_reward_bound: defined for the goal_progress lift term only");
  const double goal = config.lift_goal_frac * config.vehicle.lift_max;
  const double lowest_start = config.lift_start_mean - config.lift_start_jitter;
  return config.target_distance +
         config.lift_reward_scale * (goal - lowest_start) + 1.0;
}

}  // namespace loader_rl
