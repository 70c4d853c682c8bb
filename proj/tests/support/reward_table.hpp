#ifndef LOADER_RL_TESTS_REWARD_TABLE_HPP_
#define LOADER_RL_TESTS_REWARD_TABLE_HPP_

#include <array>
#include <string_view>

#include "loader_rl/approach_env.hpp"

namespace loader_rl::reward_table {

// Default thresholds (vicinity 1.5, speed 0.1, lift goal 0.95) with a lift
// scale and time penalty chosen so every shaping total below is exact in
// binary floating point.
inline EnvConfig config() {
  EnvConfig c;
  c.lift_reward_scale = 4.0;
  c.time_penalty = 1.0 / 1024.0;
  return c;
}

struct Row {
  std::string_view name;
  RewardInputs in;
  double total;
  Outcome outcome;
};

inline RewardInputs inputs(double prev_d, double curr_d, double prev_l, double curr_l,
                           double speed, long step, bool out_of_range, bool timeout) {
  RewardInputs in;
  in.prev_distance = prev_d;
  in.curr_distance = curr_d;
  in.prev_lift = prev_l;
  in.curr_lift = curr_l;
  in.speed = speed;
  in.step_count = step;
  in.flags.out_of_range = out_of_range;
  in.flags.timeout = timeout;
  return in;
}

// time term for step 8 is 8/1024 = 0.0078125
inline const std::array<Row, 12>& rows() {
  static const std::array<Row, 12> table = {{
      {"out of range", inputs(3.0, 2.75, 0.5, 0.5, 2.0, 8, true, false), -1.0,
       Outcome::OutOfRange},
      {"timeout", inputs(3.0, 2.75, 0.5, 0.5, 2.0, 8, false, true), -1.0, Outcome::Timeout},
      {"both failure flags", inputs(3.0, 2.75, 0.5, 0.5, 2.0, 8, true, true), -1.0,
       Outcome::OutOfRange},
      {"out of range beats success", inputs(1.5, 1.25, 0.96, 0.96, 0.0625, 8, true, false),
       -1.0, Outcome::OutOfRange},
      {"timeout beats success", inputs(1.5, 1.25, 0.96, 0.96, 0.0625, 8, false, true), -1.0,
       Outcome::Timeout},
      {"success", inputs(1.5, 1.25, 0.96, 0.96, 0.0625, 8, false, false), 1.0,
       Outcome::Success},
      {"success just inside every threshold",
       inputs(1.5, 1.4921875, 0.96, 0.9501953125, 0.0986328125, 8, false, false), 1.0,
       Outcome::Success},
      {"distance exactly at vicinity", inputs(1.75, 1.5, 0.96, 0.96, 0.0625, 8, false, false),
       0.25 - 0.0078125, Outcome::Running},
      {"speed exactly at threshold", inputs(1.5, 1.25, 0.96, 0.96, 0.1, 8, false, false),
       0.25 - 0.0078125, Outcome::Running},
      {"lift exactly at goal", inputs(1.5, 1.25, 0.95, 0.95, 0.0625, 8, false, false),
       0.25 - 0.0078125, Outcome::Running},
      {"progress and lift shaping", inputs(5.0, 4.75, 0.5, 0.75, 2.0, 8, false, false),
       0.25 + 1.0 - 0.0078125, Outcome::Running},
      {"moving away without lifting", inputs(1.5, 1.75, 0.25, 0.25, 2.0, 8, false, false),
       -0.25 - 0.0078125, Outcome::Running},
  }};
  return table;
}

}  // namespace loader_rl::reward_table

#endif  // LOADER_RL_TESTS_REWARD_TABLE_HPP_
