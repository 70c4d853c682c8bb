#include "loader_rl/run_config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "loader_rl/errors.hpp"
#include "loader_rl/rng.hpp"

namespace loader_rl {
namespace {

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_integer(const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + v + "'");
}

std::string num(double v) { return fmt::format("{}", v); }

template <typename Member>
Field dbl(std::string key, Member member) {
  return {std::move(key),
          [member](const RunConfig& c) { return num(member(c)); },
          [member](RunConfig& c, const std::string& v) { member(c) = to_double(v); }};
}

template <typename Int, typename Member>
Field integer(std::string key, Member member) {
  return {std::move(key),
          [member](const RunConfig& c) {
            return fmt::format("{}", member(c));
          },
          [member](RunConfig& c, const std::string& v) {
            member(c) = to_integer<Int>(v);
          }};
}

template <typename Member>
Field boolean(std::string key, Member member) {
  return {std::move(key),
          [member](const RunConfig& c) {
            return std::string(member(c) ? "true" : "false");
          },
          [member](RunConfig& c, const std::string& v) { member(c) = to_bool(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(integer<std::uint64_t>("seed", [](auto& c) -> auto& { return c.train.seed; }));
    f.push_back({"out", [](const RunConfig& c) { return c.out_dir; },
                 [](RunConfig& c, const std::string& v) {
                   if (v.empty()) throw std::invalid_argument("empty output directory");
                   c.out_dir = v;
                 }});
    // env
    f.push_back(dbl("env.target_distance", [](auto& c) -> auto& { return c.env.target_distance; }));
    f.push_back(dbl("env.vicinity", [](auto& c) -> auto& { return c.env.vicinity; }));
    f.push_back(dbl("env.speed_threshold", [](auto& c) -> auto& { return c.env.speed_threshold; }));
    f.push_back(dbl("env.lift_goal_frac", [](auto& c) -> auto& { return c.env.lift_goal_frac; }));
    f.push_back(dbl("env.out_of_range_radius", [](auto& c) -> auto& { return c.env.out_of_range_radius; }));
    f.push_back(dbl("env.max_episode_time", [](auto& c) -> auto& { return c.env.max_episode_time; }));
    f.push_back(dbl("env.time_penalty", [](auto& c) -> auto& { return c.env.time_penalty; }));
    f.push_back(dbl("env.lift_reward_scale", [](auto& c) -> auto& { return c.env.lift_reward_scale; }));
    f.push_back(dbl("env.dt", [](auto& c) -> auto& { return c.env.dt; }));
    f.push_back(dbl("env.lift_start_mean", [](auto& c) -> auto& { return c.env.lift_start_mean; }));
    f.push_back(dbl("env.lift_start_jitter", [](auto& c) -> auto& { return c.env.lift_start_jitter; }));
    f.push_back({"env.lift_term",
                 [](const RunConfig& c) { return std::string(to_string(c.env.lift_term)); },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "goal_progress") c.env.lift_term = LiftTermMode::GoalProgress;
                   else if (v == "literal") c.env.lift_term = LiftTermMode::Literal;
                   else throw std::invalid_argument("expected goal_progress or literal, got '" + v + "'");
                 }});
    f.push_back(boolean("env.observation_placeholder", [](auto& c) -> auto& { return c.env.observation_placeholder; }));
    // vehicle
    f.push_back(dbl("vehicle.cruise_speed", [](auto& c) -> auto& { return c.env.vehicle.cruise_speed; }));
    f.push_back(dbl("vehicle.ideal_decel", [](auto& c) -> auto& { return c.env.vehicle.ideal_decel; }));
    f.push_back(dbl("vehicle.lift_rate", [](auto& c) -> auto& { return c.env.vehicle.lift_rate; }));
    f.push_back(dbl("vehicle.lift_min", [](auto& c) -> auto& { return c.env.vehicle.lift_min; }));
    f.push_back(dbl("vehicle.lift_max", [](auto& c) -> auto& { return c.env.vehicle.lift_max; }));
    f.push_back(dbl("vehicle.steering_limit", [](auto& c) -> auto& { return c.env.vehicle.steering_limit; }));
    f.push_back(dbl("vehicle.taper.initial_pedal", [](auto& c) -> auto& { return c.env.vehicle.taper.initial_pedal; }));
    f.push_back(dbl("vehicle.taper.time_constant", [](auto& c) -> auto& { return c.env.vehicle.taper.time_constant; }));
    // train
    f.push_back(dbl("train.learning_rate", [](auto& c) -> auto& { return c.train.learning_rate; }));
    f.push_back(integer<int>("train.n_steps", [](auto& c) -> auto& { return c.train.n_steps; }));
    f.push_back(integer<int>("train.batch_size", [](auto& c) -> auto& { return c.train.batch_size; }));
    f.push_back(integer<int>("train.n_epochs", [](auto& c) -> auto& { return c.train.n_epochs; }));
    f.push_back(dbl("train.gamma", [](auto& c) -> auto& { return c.train.gamma; }));
    f.push_back(dbl("train.gae_lambda", [](auto& c) -> auto& { return c.train.gae_lambda; }));
    f.push_back(dbl("train.clip_range", [](auto& c) -> auto& { return c.train.clip_range; }));
    f.push_back(dbl("train.ent_coef", [](auto& c) -> auto& { return c.train.ent_coef; }));
    f.push_back(dbl("train.vf_coef", [](auto& c) -> auto& { return c.train.vf_coef; }));
    f.push_back(dbl("train.max_grad_norm", [](auto& c) -> auto& { return c.train.max_grad_norm; }));
    f.push_back(integer<int>("train.n_envs", [](auto& c) -> auto& { return c.train.n_envs; }));
    f.push_back(integer<long>("train.total_timesteps", [](auto& c) -> auto& { return c.train.total_timesteps; }));
    f.push_back({"train.exploration_mode",
                 [](const RunConfig& c) { return std::string(to_string(c.train.exploration_mode)); },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "bernoulli_heads") c.train.exploration_mode = ExplorationMode::BernoulliHeads;
                   else if (v == "continuous_threshold") c.train.exploration_mode = ExplorationMode::ContinuousThreshold;
                   else throw std::invalid_argument("expected bernoulli_heads or continuous_threshold, got '" + v + "'");
                 }});
    f.push_back(integer<int>("train.noise_resample_every", [](auto& c) -> auto& { return c.train.noise_resample_every; }));
    f.push_back(boolean("train.use_sde", [](auto& c) -> auto& { return c.train.use_sde; }));
    f.push_back(boolean("train.normalize_advantage", [](auto& c) -> auto& { return c.train.normalize_advantage; }));
    f.push_back(boolean("train.normalize_observations", [](auto& c) -> auto& { return c.train.normalize_observations; }));
    f.push_back(dbl("train.adam_epsilon", [](auto& c) -> auto& { return c.train.adam_epsilon; }));
    f.push_back(integer<int>("train.eval_every", [](auto& c) -> auto& { return c.train.eval_every; }));
    f.push_back(integer<int>("train.eval_episodes", [](auto& c) -> auto& { return c.train.eval_episodes; }));
    f.push_back(integer<int>("train.checkpoint_every", [](auto& c) -> auto& { return c.train.checkpoint_every; }));
    // emulation
    f.push_back(dbl("emu.position_delay", [](auto& c) -> auto& { return c.emu.position_delay; }));
    f.push_back(dbl("emu.rate_scale", [](auto& c) -> auto& { return c.emu.rate_scale; }));
    f.push_back({"emu.brake_model",
                 [](const RunConfig& c) {
                   return std::string(c.emu.brake_model == BrakeModel::Ideal ? "ideal" : "tapered");
                 },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "ideal") c.emu.brake_model = BrakeModel::Ideal;
                   else if (v == "tapered") c.emu.brake_model = BrakeModel::Tapered;
                   else throw std::invalid_argument("expected ideal or tapered, got '" + v + "'");
                 }});
    f.push_back(boolean("emu.pid_enabled", [](auto& c) -> auto& { return c.emu.pid_enabled; }));
    f.push_back(dbl("emu.accel_limit", [](auto& c) -> auto& { return c.emu.accel_limit; }));
    f.push_back(dbl("emu.utm_origin_easting", [](auto& c) -> auto& { return c.emu.utm_origin.easting; }));
    f.push_back(dbl("emu.utm_origin_northing", [](auto& c) -> auto& { return c.emu.utm_origin.northing; }));
    f.push_back(dbl("emu.pid.kp", [](auto& c) -> auto& { return c.emu.pid.kp; }));
    f.push_back(dbl("emu.pid.ki", [](auto& c) -> auto& { return c.emu.pid.ki; }));
    f.push_back(dbl("emu.pid.kd", [](auto& c) -> auto& { return c.emu.pid.kd; }));
    f.push_back(dbl("emu.pid.integral_limit", [](auto& c) -> auto& { return c.emu.pid.integral_limit; }));
    // oracle
    f.push_back(dbl("oracle.brake_margin", [](auto& c) -> auto& { return c.oracle.brake_margin; }));
    return f;
  }();
  return table;
}

std::string dump(const RunConfig& config, bool include_out,
                 std::string_view only_prefix_a = {},
                 std::string_view only_prefix_b = {}) {
  std::string out;
  if (only_prefix_a.empty()) out += fmt::format("version = {}\n", kConfigVersion);
  for (const Field& f : fields()) {
    if (!include_out && f.key == "out") continue;
    if (!only_prefix_a.empty() && !f.key.starts_with(only_prefix_a) &&
        !f.key.starts_with(only_prefix_b))
      continue;
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  train.validate();
  emu.validate();
  oracle.validate();
}

RunConfig parse_run_config(std::string_view text) {
  std::map<std::string, const Field*> by_key;
  for (const Field& f : fields()) by_key[f.key] = &f;

  RunConfig config;
  std::map<std::string, int> seen;
  std::istringstream is{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("line {}: expected key = value", line_no), line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError(fmt::format("line {}: duplicate key '{}' (first set on line {})",
                                    line_no, key, it->second),
                        line_no);
    seen[key] = line_no;
    if (key == "version") {
      int v = 0;
      try {
        v = to_integer<int>(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("line {}: version: {}", line_no, e.what()), line_no);
      }
      if (v != kConfigVersion)
        throw ConfigError(fmt::format("line {}: unsupported config version {} (expected {})",
                                      line_no, v, kConfigVersion),
                          line_no);
      continue;
    }
    auto it = by_key.find(key);
    if (it == by_key.end())
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key), line_no);
    try {
      it->second->set(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("line {}: {}: {}", line_no, key, e.what()), line_no);
    }
  }
  if (!seen.count("version"))
    throw ConfigError("missing required key 'version'");
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    // point at the line of the key named in the message, when there is one
    const std::string msg = e.what();
    int line = 0;
    for (const auto& [key, ln] : seen) {
      if (msg.find(key) != std::string::npos) line = ln;
    }
    throw ConfigError(line ? fmt::format("line {}: {}", line, msg) : msg, line);
  }
  return config;
}

std::string to_config_text(const RunConfig& config) { return dump(config, true); }

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

std::string config_digest(const RunConfig& config) {
  return hex64(fnv1a64(dump(config, false)));
}

std::uint64_t env_config_hash(const EnvConfig& env) {
  RunConfig c;
  c.env = env;
  return fnv1a64(dump(c, false, "env.", "vehicle."));
}

}  // namespace loader_rl
