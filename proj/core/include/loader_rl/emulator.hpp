#ifndef LOADER_RL_EMULATOR_HPP_
#define LOADER_RL_EMULATOR_HPP_

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "loader_rl/approach_env.hpp"
#include "loader_rl/evaluation.hpp"
#include "loader_rl/trace.hpp"
#include "loader_rl/vehicle.hpp"

namespace loader_rl {

struct PolicyCheckpoint;

// Output range [-1, 1]: positive is throttle, negative a brake pedal fraction.
struct PidGains {
  double kp = 0.8;
  double ki = 0.3;
  double kd = 0.0;
  double integral_limit = 0.3;  // m/s * s

  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  bool primed = false;  // false until the first update (no derivative kick)
};

struct PidResult {
  double command = 0.0;
  PidState state;
};

PidResult pid_throttle(const PidState& state, double target_speed,
                       double measured_speed, double dt, const PidGains& gains);

// Easting/northing in metres. No datum conversion.
struct UtmPosition {
  double easting = 0.0;
  double northing = 0.0;
};

// Position history for a sensor that reports with a fixed latency.
class DelayBuffer {
 public:
  explicit DelayBuffer(double delay);

  // Timestamps must be strictly increasing. The first sample is kept for
  // start-up reads.
  void push(double t, Position2 position);

  // Newest sample stamped at or before now - delay, else the first sample.
  // Assumes `now` never precedes the newest pushed timestamp by more than
  // the delay.
  Position2 read(double now) const;

  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }

 private:
  struct Sample {
    double t;
    Position2 position;
  };

  double delay_;
  Position2 initial_;
  std::deque<Sample> samples_;
};

struct EmulationConfig {
  double position_delay = 3.0;  // s
  double rate_scale = 0.1;      // controller rate relative to the plant rate
  PidGains pid;
  BrakeModel brake_model = BrakeModel::Tapered;
  bool pid_enabled = true;
  double accel_limit = 1.0;  // m/s^2 at full throttle
  UtmPosition utm_origin;

  void validate() const;
  // plant steps per controller decision
  int decimation() const;
};

// Relative observation from UTM positions: target 5 m ahead of the start
// along the heading, components as absolute differences.
Observation utm_relative_observation(const UtmPosition& current,
                                     const UtmPosition& start, double heading,
                                     double speed, double lift,
                                     const EnvConfig& config);

inline constexpr double kRunOutLimit = 60.0;

struct EmulationTrace {
  EpisodeTrace episode;
  std::vector<EmulationRow> extras;
  // The episode trace ends at termination. If the vehicle is still moving
  // then, the same controller keeps driving it (run-out) until standstill or
  // for at most `kRunOutLimit` seconds; the two fields below cover both.
  double braking_onset = -1.0;  // s of the first braked step, -1 if never
  double overshoot = 0.0;       // along-track distance past the target at rest
  double rest_time = 0.0;  // s at which the vehicle came to rest
  int decisions = 0;
};

// Plant runs at config.dt; the policy and PID run every decimation() plant
// steps with actions held in between. Rewards and termination use the true
// state; the policy sees positions through the delay buffer.
EmulationTrace run_emulated_episode(const PolicyFn& policy,
                                    const EnvConfig& config,
                                    const EmulationConfig& emu,
                                    std::uint64_t seed,
                                    const std::string& config_digest = "");

// Checkpoint variant with the greedy policy. Throws std::invalid_argument if
// the checkpoint was trained on a different environment configuration.
EmulationTrace run_emulated_episode(const PolicyCheckpoint& checkpoint,
                                    const EnvConfig& config,
                                    const EmulationConfig& emu,
                                    std::uint64_t seed);

}  // namespace loader_rl

#endif  // LOADER_RL_EMULATOR_HPP_
