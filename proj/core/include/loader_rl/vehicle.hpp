#ifndef LOADER_RL_VEHICLE_HPP_
#define LOADER_RL_VEHICLE_HPP_

namespace loader_rl {

// Brake pedal profile used when the brake model is Tapered: the pedal jumps
// to `initial_pedal` on engagement and then decays exponentially.
struct TaperParams {
  double initial_pedal = 0.6;
  double time_constant = 2.5;  // s

  void validate() const;
};

// Planar wheel loader parameters. Lift is a normalized fraction of the
// maximum boom height.
struct VehicleParams {
  double cruise_speed = 2.0;      // m/s
  double ideal_decel = 2.0;       // m/s^2 at full pedal
  double lift_rate = 0.15;        // fraction of range per second
  double lift_min = 0.0;
  double lift_max = 1.0;
  double steering_limit = 0.6545;  // rad, about 37.5 deg; stored, unused
  TaperParams taper;

  void validate() const;
};

// Heading is measured clockwise from the +y (northing) axis, so the vehicle
// moves along (sin(heading), cos(heading)).
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double lift = 0.0;
  double elapsed = 0.0;
  double pedal = 0.0;  // current brake pedal fraction, 0 when released

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct Controls {
  bool brake = false;
  bool lift_up = false;

  friend bool operator==(const Controls&, const Controls&) = default;
};

enum class BrakeModel { Ideal, Tapered };

struct TaperedBrake {
  double decel;  // m/s^2
  double pedal;  // pedal fraction after this step
};

// Pedal update for one step with the brake held. A released pedal (0) starts
// at the initial value; an engaged pedal decays by exp(-dt / time_constant).
// Callers reset the pedal to zero on release.
TaperedBrake tapered_brake_decel(double pedal, double dt,
                                 const TaperParams& taper,
                                 double ideal_decel);

// Explicit Euler update of pose, lift and clock given the speed for the
// next step. Position advances with the current (pre-update) speed.
VehicleState integrate_vehicle(const VehicleState& state, double next_speed,
                               double next_pedal, bool lift_up, double dt,
                               const VehicleParams& params);

// One fixed-timestep update. Without braking the speed snaps to cruise speed
// (no engine model). Throws std::invalid_argument for non-finite state or
// dt <= 0.
VehicleState step_vehicle(const VehicleState& state, Controls controls,
                          double dt, const VehicleParams& params,
                          BrakeModel brake_model = BrakeModel::Ideal);

}  // namespace loader_rl

#endif  // LOADER_RL_VEHICLE_HPP_
