#include "loader_rl/cli/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <string_view>

#include "loader_rl/errors.hpp"

namespace loader_rl::cli {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

struct Range {
  double lo;
  double hi;
};

Range padded(double lo, double hi) {
  if (!(lo < hi)) return {lo - 1.0, hi + 1.0};
  return {lo, hi};
}

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;
constexpr int kTicks = 5;

}  // namespace

MetricsFile read_metrics_csv(std::istream& is) {
  MetricsFile out;
  std::string line;
  int line_no = 0;
  std::size_t ts_col = 0;
  std::size_t reward_col = 0;
  std::size_t columns = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kDigest = "# config_digest=";
      if (line.starts_with(kDigest)) out.config_digest = line.substr(kDigest.size());
      continue;
    }
    const auto fields = split(line);
    if (!header) {
      const auto ts = std::find(fields.begin(), fields.end(), "timestep");
      const auto reward = std::find(fields.begin(), fields.end(), "ep_reward_mean");
      if (ts == fields.end() || reward == fields.end())
        throw FormatError(fmt::format(
            "metrics line {}: header lacks timestep/ep_reward_mean columns", line_no));
      ts_col = static_cast<std::size_t>(ts - fields.begin());
      reward_col = static_cast<std::size_t>(reward - fields.begin());
      columns = fields.size();
      header = true;
      continue;
    }
    if (fields.size() != columns)
      throw FormatError(fmt::format("metrics line {}: expected {} fields, got {}",
                                    line_no, columns, fields.size()));
    RewardPoint p;
    if (!parse_number(fields[ts_col], p.timestep))
      throw FormatError(fmt::format("metrics line {}: bad timestep '{}'", line_no,
                                    fields[ts_col]));
    if (!parse_number(fields[reward_col], p.ep_reward_mean))
      throw FormatError(fmt::format("metrics line {}: bad ep_reward_mean '{}'", line_no,
                                    fields[reward_col]));
    out.points.push_back(p);
  }
  if (!header) throw FormatError(fmt::format("metrics line {}: empty metrics file", line_no));
  return out;
}

std::string render_reward_svg(const MetricsFile& metrics) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : metrics.points)
    if (std::isfinite(p.ep_reward_mean))
      pts.emplace_back(static_cast<double>(p.timestep), p.ep_reward_mean);

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& [x, y] : pts) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  }
  if (pts.empty()) x_lo = x_hi = y_lo = y_hi = 0.0;
  const Range xr = padded(x_lo, x_hi);
  const Range yr = padded(y_lo, y_hi);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto sy = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

  std::string svg;
  auto out = std::back_inserter(svg);
  fmt::format_to(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                 "viewBox=\"0 0 {0} {1}\">\n",
                 kWidth, kHeight);
  if (!metrics.config_digest.empty())
    fmt::format_to(out, "<!-- config_digest={} -->\n", metrics.config_digest);
  fmt::format_to(out, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  fmt::format_to(out,
                 "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n"
                 "<text x=\"{:.2f}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
                 "Mean episode reward</text>\n",
                 kLeft + plot_w / 2);
  fmt::format_to(out,
                 "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">timestep</text>\n",
                 kLeft + plot_w / 2, kHeight - 10);
  for (int i = 0; i <= kTicks; ++i) {
    const double f = static_cast<double>(i) / kTicks;
    const double xv = xr.lo + f * (xr.hi - xr.lo);
    const double yv = yr.lo + f * (yr.hi - yr.lo);
    fmt::format_to(out,
                   "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
                   "stroke=\"#dddddd\"/>\n"
                   "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:.6g}</text>\n",
                   sx(xv), kTop, kTop + plot_h, kTop + plot_h + 16, xv);
    fmt::format_to(out,
                   "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
                   "stroke=\"#dddddd\"/>\n"
                   "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.4g}</text>\n",
                   kLeft, sy(yv), kLeft + plot_w, kLeft - 6, sy(yv) + 4, yv);
  }
  fmt::format_to(out, "</g>\n");
  fmt::format_to(out,
                 "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                 "stroke=\"black\"/>\n",
                 kLeft, kTop, plot_w, plot_h);
  fmt::format_to(out, "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"");
  for (std::size_t i = 0; i < pts.size(); ++i)
    fmt::format_to(out, "{}{:.2f},{:.2f}", i ? " " : "", sx(pts[i].first), sy(pts[i].second));
  fmt::format_to(out, "\"/>\n</svg>\n");
  return svg;
}

}  // namespace loader_rl::cli
