#include "loader_rl/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loader_rl/checkpoint.hpp"
#include "loader_rl/run_config.hpp"

namespace loader_rl {
namespace {

// slack for accumulated floating-point clock error
constexpr double kClockTolerance = 1e-9;

}  // namespace

void PidGains::validate() const {
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
    throw std::invalid_argument("emu.pid gains must be finite");
  if (!(integral_limit > 0.0))
    throw std::invalid_argument("emu.pid.integral_limit must be > 0");
}

PidResult pid_throttle(const PidState& state, double target_speed,
                       double measured_speed, double dt, const PidGains& gains) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_throttle: dt must be > 0");
  const double error = target_speed - measured_speed;
  PidResult out;
  out.state.integral = std::clamp(state.integral + error * dt,
                                  -gains.integral_limit, gains.integral_limit);
  const double derivative = state.primed ? (error - state.prev_error) / dt : 0.0;
  out.state.prev_error = error;
  out.state.primed = true;
  out.command = std::clamp(
      gains.kp * error + gains.ki * out.state.integral + gains.kd * derivative,
      -1.0, 1.0);
  return out;
}

DelayBuffer::DelayBuffer(double delay) : delay_(delay) {
  if (!(delay >= 0.0)) throw std::invalid_argument("DelayBuffer: delay must be >= 0");
}

void DelayBuffer::push(double t, Position2 position) {
  if (samples_.empty()) {
    initial_ = position;
  } else if (!(t > samples_.back().t)) {
    throw std::invalid_argument("DelayBuffer::push: timestamps must increase");
  }
  samples_.push_back({t, position});
  // drop samples that a later sample already supersedes for any read at or
  // after t
  const double horizon = t - delay_ + kClockTolerance;
  while (samples_.size() > 1 && samples_[1].t <= horizon) samples_.pop_front();
}

Position2 DelayBuffer::read(double now) const {
  if (samples_.empty()) throw std::logic_error("DelayBuffer::read: empty buffer");
  const double horizon = now - delay_ + kClockTolerance;
  for (auto it = samples_.rbegin(); it != samples_.rend(); ++it) {
    if (it->t <= horizon) return it->position;
  }
  return initial_;
}

void EmulationConfig::validate() const {
  if (!(position_delay >= 0.0))
    throw std::invalid_argument("emu.position_delay must be >= 0");
  if (!(rate_scale > 0.0 && rate_scale <= 1.0))
    throw std::invalid_argument("emu.rate_scale must be in (0, 1]");
  if (!(accel_limit > 0.0))
    throw std::invalid_argument("emu.accel_limit must be > 0");
  if (!std::isfinite(utm_origin.easting) || !std::isfinite(utm_origin.northing))
    throw std::invalid_argument("emu.utm_origin must be finite");
  pid.validate();
}

int EmulationConfig::decimation() const {
  return std::max(1, static_cast<int>(std::lround(1.0 / rate_scale)));
}

Observation utm_relative_observation(const UtmPosition& current,
                                     const UtmPosition& start, double heading,
                                     double speed, double lift,
                                     const EnvConfig& config) {
  const Position2 target =
      target_from_heading({0.0, 0.0}, heading, config.target_distance);
  const double dx = current.easting - start.easting;
  const double dy = current.northing - start.northing;
  return {std::abs(target.x - dx), std::abs(target.y - dy), speed, lift};
}

EmulationTrace run_emulated_episode(const PolicyFn& policy,
                                    const EnvConfig& config,
                                    const EmulationConfig& emu,
                                    std::uint64_t seed,
                                    const std::string& config_digest) {
  config.validate();
  emu.validate();
  EnvState env = reset(config, seed).first;
  const double heading = env.vehicle.heading;
  const UtmPosition start_utm{emu.utm_origin.easting + env.start.x,
                              emu.utm_origin.northing + env.start.y};
  const int every = emu.decimation();
  const double control_dt = every * config.dt;
  const Position2 forward{std::sin(heading), std::cos(heading)};

  EmulationTrace out;
  out.episode.meta = make_trace_meta(env, config, config_digest);

  DelayBuffer sensor(emu.position_delay);
  sensor.push(env.vehicle.elapsed, {env.vehicle.x, env.vehicle.y});
  PidState pid;
  double pid_command = 0.0;
  Action held;

  long k = 0;
  // one plant step under the delayed, decimated controller
  auto control_step = [&](const VehicleState& now, double& pedal_fraction) {
    if (k++ % every == 0) {
      const Position2 seen = sensor.read(now.elapsed);
      const Observation obs = utm_relative_observation(
          {emu.utm_origin.easting + seen.x, emu.utm_origin.northing + seen.y},
          start_utm, heading, now.speed, now.lift, config);
      held = policy(obs);
      ++out.decisions;
      if (emu.pid_enabled) {
        const PidResult r = pid_throttle(pid, config.vehicle.cruise_speed, now.speed,
                                         control_dt, emu.pid);
        pid = r.state;
        pid_command = r.command;
      }
    }
    if (held.brake && out.braking_onset < 0.0) out.braking_onset = now.elapsed;

    pedal_fraction = 0.0;
    if (!emu.pid_enabled || held.brake) {
      // agent braking overrides the speed controller
      const VehicleState next =
          step_vehicle(now, held, config.dt, config.vehicle, emu.brake_model);
      pedal_fraction = held.brake ? next.pedal : 0.0;
      return next;
    }
    double speed = now.speed;
    if (pid_command >= 0.0) {
      speed += pid_command * emu.accel_limit * config.dt;
    } else {
      pedal_fraction = -pid_command;
      speed = std::max(0.0, speed - pedal_fraction * config.vehicle.ideal_decel * config.dt);
    }
    return integrate_vehicle(now, speed, 0.0, held.lift_up, config.dt, config.vehicle);
  };
  auto along_track = [&](const VehicleState& v) {
    return (v.x - env.start.x) * forward.x + (v.y - env.start.y) * forward.y;
  };

  while (!env.done) {
    double pedal_fraction = 0.0;
    const VehicleState next = control_step(env.vehicle, pedal_fraction);
    const StepResult result = advance(env, next, config);
    out.episode.rows.push_back(make_trace_row(env, held, result));
    sensor.push(env.vehicle.elapsed, {env.vehicle.x, env.vehicle.y});

    const Position2 reported = sensor.read(env.vehicle.elapsed);
    EmulationRow extra;
    extra.true_x = emu.utm_origin.easting + env.vehicle.x;
    extra.true_y = emu.utm_origin.northing + env.vehicle.y;
    extra.delayed_x = emu.utm_origin.easting + reported.x;
    extra.delayed_y = emu.utm_origin.northing + reported.y;
    extra.pid_command = emu.pid_enabled ? pid_command : 0.0;
    extra.pedal_fraction = pedal_fraction;
    extra.overshoot = std::max(0.0, along_track(env.vehicle) - config.target_distance);
    out.extras.push_back(extra);
  }

  // run-out: the episode is over but the machine is still moving, so the
  // same controller keeps driving until standstill
  VehicleState rest = env.vehicle;
  const double run_out_end = rest.elapsed + kRunOutLimit;
  while (rest.speed > 0.0 && rest.elapsed < run_out_end) {
    double pedal_fraction = 0.0;
    rest = control_step(rest, pedal_fraction);
    sensor.push(rest.elapsed, {rest.x, rest.y});
  }
  out.overshoot = std::max(0.0, along_track(rest) - config.target_distance);
  out.rest_time = rest.elapsed;
  return out;
}

EmulationTrace run_emulated_episode(const PolicyCheckpoint& checkpoint,
                                    const EnvConfig& config,
                                    const EmulationConfig& emu,
                                    std::uint64_t seed) {
  if (checkpoint.env_config_hash != env_config_hash(config))
    throw std::invalid_argument(
        "checkpoint was trained with a different environment configuration");
  return run_emulated_episode(greedy_policy(checkpoint.params, config), config,
                              emu, seed, checkpoint.config_digest);
}

}  // namespace loader_rl
