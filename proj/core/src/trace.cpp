#include "loader_rl/trace.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "loader_rl/errors.hpp"

namespace loader_rl {
namespace {

constexpr const char* kTraceMagic = "loader_rl-trace v1";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, int line, const char* what) {
  if (text.empty())
    throw FormatError(fmt::format("trace line {}: empty value for {}", line, what));
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    throw FormatError(
        fmt::format("trace line {}: bad number '{}' for {}", line, text, what));
  return v;
}

}  // namespace

double EpisodeTrace::total_reward() const {
  double sum = 0.0;
  for (const auto& row : rows) sum += row.reward_total;
  return sum;
}

TraceMeta make_trace_meta(const EnvState& initial, const EnvConfig& config,
                          std::string config_digest) {
  TraceMeta meta;
  meta.config_digest = std::move(config_digest);
  meta.heading = initial.vehicle.heading;
  meta.start = initial.start;
  meta.target = initial.target;
  meta.initial_distance = config.target_distance;
  meta.initial_lift = initial.vehicle.lift;
  return meta;
}

TraceRow make_trace_row(const EnvState& after, Action action,
                        const StepResult& result) {
  TraceRow row;
  row.step = after.step_count;
  row.t = after.vehicle.elapsed;
  row.x = after.vehicle.x;
  row.y = after.vehicle.y;
  row.rel_x = result.observation.rel_x;
  row.rel_y = result.observation.rel_y;
  row.speed = after.vehicle.speed;
  row.lift = after.vehicle.lift;
  row.brake_action = action.brake;
  row.lift_action = action.lift_up;
  row.reward_total = result.reward.total;
  row.reward_progress = result.reward.progress_term;
  row.reward_lift = result.reward.lift_term;
  row.reward_time = result.reward.time_term;
  row.outcome = result.reward.outcome;
  return row;
}

std::vector<std::string> trace_columns() {
  return {"step",          "t",           "x",
          "y",             "rel_x",       "rel_y",
          "speed",         "lift",        "brake_action",
          "lift_action",   "reward_total", "reward_progress",
          "reward_lift",   "reward_time", "outcome"};
}

std::vector<std::string> emulation_columns() {
  return {"true_x",      "true_y",         "delayed_x", "delayed_y",
          "pid_command", "pedal_fraction", "overshoot"};
}

void write_trace_csv(
    std::ostream& os, const EpisodeTrace& trace, bool normalized,
    std::span<const EmulationRow> emulation,
    const std::vector<std::pair<std::string, std::string>>& extra_meta) {
  if (!emulation.empty() && emulation.size() != trace.rows.size())
    throw std::invalid_argument("write_trace_csv: emulation rows mismatch");

  // numeric table: column 0 is step, outcome is kept aside
  std::vector<std::string> names = trace_columns();
  names.pop_back();
  if (!emulation.empty()) {
    for (auto& c : emulation_columns()) names.push_back(c);
  }
  std::vector<std::vector<double>> table;
  table.reserve(trace.rows.size());
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& r = trace.rows[i];
    std::vector<double> v{static_cast<double>(r.step),
                          r.t, r.x, r.y, r.rel_x, r.rel_y, r.speed, r.lift,
                          r.brake_action ? 1.0 : 0.0,
                          r.lift_action ? 1.0 : 0.0,
                          r.reward_total, r.reward_progress, r.reward_lift,
                          r.reward_time};
    if (!emulation.empty()) {
      const EmulationRow& e = emulation[i];
      v.insert(v.end(), {e.true_x, e.true_y, e.delayed_x, e.delayed_y,
                         e.pid_command, e.pedal_fraction, e.overshoot});
    }
    table.push_back(std::move(v));
  }
  if (normalized && !table.empty()) {
    for (std::size_t c = 1; c < names.size(); ++c) {
      double lo = table[0][c], hi = table[0][c];
      for (const auto& row : table) {
        lo = std::min(lo, row[c]);
        hi = std::max(hi, row[c]);
      }
      for (auto& row : table) {
        if (hi > lo) row[c] = (row[c] - lo) / (hi - lo);
        else row[c] = row[c] != 0.0 ? 1.0 : 0.0;
      }
    }
  }

  const TraceMeta& m = trace.meta;
  os << "# " << kTraceMagic << '\n';
  os << "# config_digest=" << m.config_digest << '\n';
  os << fmt::format("# heading={}\n# start_x={}\n# start_y={}\n", m.heading,
                    m.start.x, m.start.y);
  os << fmt::format("# target_x={}\n# target_y={}\n", m.target.x, m.target.y);
  os << fmt::format("# initial_distance={}\n# initial_lift={}\n",
                    m.initial_distance, m.initial_lift);
  os << "# normalized=" << (normalized ? 1 : 0) << '\n';
  for (const auto& [k, v] : extra_meta) os << "# " << k << '=' << v << '\n';

  std::vector<std::string> header = names;
  header.insert(header.begin() + 14, "outcome");
  for (std::size_t c = 0; c < header.size(); ++c) {
    os << (c ? "," : "") << header[c];
  }
  os << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    os << trace.rows[i].step;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (c == 14) os << ',' << to_string(trace.rows[i].outcome);
      os << ',' << fmt::format("{}", row[c]);
    }
    if (row.size() == 14) os << ',' << to_string(trace.rows[i].outcome);
    os << '\n';
  }
}

EpisodeTrace read_trace_csv(std::istream& is) {
  EpisodeTrace trace;
  std::map<std::string, std::string> meta;
  std::string line;
  int line_no = 0;
  bool magic_seen = false;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      if (body == kTraceMagic) {
        magic_seen = true;
        continue;
      }
      const auto eq = body.find('=');
      if (eq != std::string::npos) meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    header = split(line, ',');
    break;
  }
  if (!magic_seen) throw FormatError("trace: missing '# loader_rl-trace v1' line");
  if (meta.count("normalized") && meta["normalized"] != "0")
    throw FormatError("trace: normalized traces cannot be re-evaluated");
  const std::vector<std::string> expected = trace_columns();
  if (header.size() < expected.size() ||
      !std::equal(expected.begin(), expected.end(), header.begin()))
    throw FormatError(
        fmt::format("trace line {}: header does not match trace columns", line_no));

  auto meta_num = [&](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end())
      throw FormatError(fmt::format("trace: missing metadata '{}'", key));
    return parse_double(it->second, 0, key);
  };
  trace.meta.config_digest = meta.count("config_digest") ? meta["config_digest"] : "";
  trace.meta.heading = meta_num("heading");
  trace.meta.start = {meta_num("start_x"), meta_num("start_y")};
  trace.meta.target = {meta_num("target_x"), meta_num("target_y")};
  trace.meta.initial_distance = meta_num("initial_distance");
  trace.meta.initial_lift = meta_num("initial_lift");

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size())
      throw FormatError(fmt::format("trace line {}: expected {} fields, got {}",
                                    line_no, header.size(), f.size()));
    TraceRow r;
    const double step = parse_double(f[0], line_no, "step");
    r.step = static_cast<long>(step);
    if (static_cast<double>(r.step) != step)
      throw FormatError(fmt::format("trace line {}: non-integer step", line_no));
    r.t = parse_double(f[1], line_no, "t");
    r.x = parse_double(f[2], line_no, "x");
    r.y = parse_double(f[3], line_no, "y");
    r.rel_x = parse_double(f[4], line_no, "rel_x");
    r.rel_y = parse_double(f[5], line_no, "rel_y");
    r.speed = parse_double(f[6], line_no, "speed");
    r.lift = parse_double(f[7], line_no, "lift");
    r.brake_action = parse_double(f[8], line_no, "brake_action") != 0.0;
    r.lift_action = parse_double(f[9], line_no, "lift_action") != 0.0;
    r.reward_total = parse_double(f[10], line_no, "reward_total");
    r.reward_progress = parse_double(f[11], line_no, "reward_progress");
    r.reward_lift = parse_double(f[12], line_no, "reward_lift");
    r.reward_time = parse_double(f[13], line_no, "reward_time");
    try {
      r.outcome = outcome_from_string(f[14]);
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("trace line {}: {}", line_no, e.what()));
    }
    trace.rows.push_back(r);
  }
  return trace;
}

}  // namespace loader_rl
