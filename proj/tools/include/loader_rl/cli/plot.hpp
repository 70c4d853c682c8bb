#ifndef LOADER_RL_CLI_PLOT_HPP_
#define LOADER_RL_CLI_PLOT_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace loader_rl::cli {

struct RewardPoint {
  long timestep = 0;
  double ep_reward_mean = 0.0;  // NaN before the first finished episode
};

struct MetricsFile {
  std::string config_digest;
  std::vector<RewardPoint> points;
};

// Parses a metrics.csv written by the trainer. Throws FormatError naming the
// offending line for an empty file, a missing header, or a bad row.
MetricsFile read_metrics_csv(std::istream& is);

// Self-contained SVG line chart of mean episode reward against timestep.
// Points with a NaN reward are left out of the polyline.
std::string render_reward_svg(const MetricsFile& metrics);

}  // namespace loader_rl::cli

#endif  // LOADER_RL_CLI_PLOT_HPP_
