#ifndef LOADER_RL_TRACE_HPP_
#define LOADER_RL_TRACE_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loader_rl/approach_env.hpp"

namespace loader_rl {

// Per-episode constants needed to re-evaluate rewards from a trace.
struct TraceMeta {
  std::string config_digest;
  double heading = 0.0;
  Position2 start;
  Position2 target;
  double initial_distance = 0.0;
  double initial_lift = 0.0;
};

struct TraceRow {
  long step = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double rel_x = 0.0;
  double rel_y = 0.0;
  double speed = 0.0;
  double lift = 0.0;
  bool brake_action = false;
  bool lift_action = false;
  double reward_total = 0.0;
  double reward_progress = 0.0;
  double reward_lift = 0.0;
  double reward_time = 0.0;
  Outcome outcome = Outcome::Running;
};

struct EpisodeTrace {
  TraceMeta meta;
  std::vector<TraceRow> rows;

  double total_reward() const;
};

// Emulator-only columns appended after the episode columns.
struct EmulationRow {
  double true_x = 0.0;
  double true_y = 0.0;
  double delayed_x = 0.0;
  double delayed_y = 0.0;
  double pid_command = 0.0;
  double pedal_fraction = 0.0;
  double overshoot = 0.0;
};

TraceMeta make_trace_meta(const EnvState& initial, const EnvConfig& config,
                          std::string config_digest);
TraceRow make_trace_row(const EnvState& after, Action action,
                        const StepResult& result);

// Column names in file order.
std::vector<std::string> trace_columns();
std::vector<std::string> emulation_columns();

// `normalized` min-max scales every numeric column except `step` to [0, 1];
// a constant column becomes 1, or 0 if it is all zeros. Normalized traces
// are for plotting only.
// `extra_meta` lines are written as "# key=value" comments.
void write_trace_csv(std::ostream& os, const EpisodeTrace& trace,
                     bool normalized = false,
                     std::span<const EmulationRow> emulation = {},
                     const std::vector<std::pair<std::string, std::string>>&
                         extra_meta = {});

// Reads a raw (non-normalized) trace; extra columns are ignored. Throws
// FormatError naming the offending line.
EpisodeTrace read_trace_csv(std::istream& is);

}  // namespace loader_rl

#endif  // LOADER_RL_TRACE_HPP_
