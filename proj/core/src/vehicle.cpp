#include "loader_rl/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loader_rl {

void TaperParams::validate() const {
  if (!(initial_pedal > 0.0 && initial_pedal <= 1.0))
    throw std::invalid_argument("taper.initial_pedal must be in (0, 1]");
  if (!(time_constant > 0.0))
    throw std::invalid_argument("taper.time_constant must be > 0");
}

void VehicleParams::validate() const {
  if (!(cruise_speed > 0.0))
    throw std::invalid_argument("vehicle.cruise_speed must be > 0");
  if (!(ideal_decel > 0.0))
    throw std::invalid_argument("vehicle.ideal_decel must be > 0");
  if (!(lift_rate > 0.0))
    throw std::invalid_argument("vehicle.lift_rate must be > 0");
  if (!(lift_min < lift_max))
    throw std::invalid_argument("vehicle.lift_min must be < lift_max");
  if (!(steering_limit > 0.0))
    throw std::invalid_argument("vehicle.steering_limit must be > 0");
  taper.validate();
}

TaperedBrake tapered_brake_decel(double pedal, double dt,
                                 const TaperParams& taper,
                                 double ideal_decel) {
  const double next = pedal <= 0.0
                          ? taper.initial_pedal
                          : pedal * std::exp(-dt / taper.time_constant);
  return {next * ideal_decel, next};
}

VehicleState integrate_vehicle(const VehicleState& state, double next_speed,
                               double next_pedal, bool lift_up, double dt,
                               const VehicleParams& params) {
  VehicleState next = state;
  next.x = state.x + state.speed * dt * std::sin(state.heading);
  next.y = state.y + state.speed * dt * std::cos(state.heading);
  next.speed = std::clamp(next_speed, 0.0, params.cruise_speed);
  next.pedal = next_pedal;
  if (lift_up) {
    next.lift = std::min(params.lift_max, state.lift + params.lift_rate * dt);
  }
  next.lift = std::clamp(next.lift, params.lift_min, params.lift_max);
  next.elapsed = state.elapsed + dt;
  return next;
}

VehicleState step_vehicle(const VehicleState& state, Controls controls,
                          double dt, const VehicleParams& params,
                          BrakeModel brake_model) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step_vehicle: dt must be finite and > 0");
  for (double v : {state.x, state.y, state.heading, state.speed, state.lift,
                   state.elapsed, state.pedal}) {
    if (!std::isfinite(v))
      throw std::invalid_argument("step_vehicle: non-finite vehicle state");
  }

  double speed = params.cruise_speed;
  double pedal = 0.0;
  if (controls.brake) {
    double decel = params.ideal_decel;
    if (brake_model == BrakeModel::Tapered) {
      const TaperedBrake brake =
          tapered_brake_decel(state.pedal, dt, params.taper, params.ideal_decel);
      decel = brake.decel;
      pedal = brake.pedal;
    } else {
      pedal = 1.0;
    }
    speed = std::max(0.0, state.speed - decel * dt);
  }
  return integrate_vehicle(state, speed, pedal, controls.lift_up, dt, params);
}

}  // namespace loader_rl
