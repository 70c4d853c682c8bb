#include "loader_rl/cli/commands.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "loader_rl/checkpoint.hpp"
#include "loader_rl/cli/plot.hpp"
#include "loader_rl/emulator.hpp"
#include "loader_rl/errors.hpp"
#include "loader_rl/evaluation.hpp"
#include "loader_rl/trace.hpp"
#include "loader_rl/trainer.hpp"

namespace loader_rl::cli {
namespace fs = std::filesystem;
namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Creates the parent directory and writes `path` via a temporary file so a
// failed run never leaves a half-written artifact behind.
void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << text;
    out.flush();
    if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot write {}: {}", path.string(), ec.message()));
}

// Resolved policy together with the configuration it runs under.
struct ResolvedPolicy {
  RunConfig config;
  std::string digest;
  PolicyFn policy;
  std::string kind;  // "checkpoint" or "oracle"
  long timesteps = 0;
};

ResolvedPolicy resolve(const PolicySource& source) {
  if (source.checkpoint.has_value() == source.oracle)
    throw std::invalid_argument("exactly one of --checkpoint or --oracle is required");
  std::optional<RunConfig> given;
  if (source.config) given = load_run_config(*source.config);

  ResolvedPolicy out;
  if (source.oracle) {
    out.config = given.value_or(RunConfig{});
    out.digest = config_digest(out.config);
    out.policy = oracle_policy(out.config.oracle, out.config.env);
    out.kind = "oracle";
    return out;
  }
  const PolicyCheckpoint ckpt = read_checkpoint_file(*source.checkpoint);
  if (given) {
    if (auto warning = env_mismatch_warning(ckpt, env_config_hash(given->env)))
      throw ConfigError(fmt::format("{}: {}", source.checkpoint->string(), *warning));
    out.config = *given;
  } else {
    out.config = parse_run_config(ckpt.config_text);
  }
  out.digest = ckpt.config_digest;
  out.policy = greedy_policy(ckpt.params, out.config.env);
  out.kind = "checkpoint";
  out.timesteps = static_cast<long>(ckpt.timesteps);
  // the checkpoint's training settings are what the report should record
  out.config.train = ckpt.train_config();
  return out;
}

nlohmann::json bucket_json(const BucketStats& b) {
  nlohmann::json j;
  j["episodes"] = b.episodes;
  if (b.episodes == 0) {
    j["reward_mean"] = nullptr;
    j["reward_variance"] = nullptr;
    j["success_rate"] = nullptr;
    j["stop_error_mean"] = nullptr;
  } else {
    j["reward_mean"] = b.reward_mean;
    j["reward_variance"] = b.reward_variance;
    j["success_rate"] = b.success_rate;
    j["stop_error_mean"] = b.stop_error_mean;
  }
  return j;
}

std::string_view brake_name(BrakeModel m) {
  return m == BrakeModel::Ideal ? "ideal" : "tapered";
}

}  // namespace

int guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kExitNumerical;
  } catch (const IoError& e) {
    spdlog::error("i/o error: {}", e.what());
    return kExitIo;
  } catch (const FormatError& e) {
    spdlog::error("format error: {}", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("i/o error: {}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  }
}

RunConfig load_run_config(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return parse_run_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()), e.line());
  }
}

int cmd_train(const TrainOptions& options) {
  return guarded([&] {
    RunConfig config = load_run_config(options.config);
    if (options.seed) config.train.seed = *options.seed;
    if (options.out) config.out_dir = options.out->string();
    if (options.total_timesteps) config.train.total_timesteps = *options.total_timesteps;
    config.validate();

    const fs::path out = config.out_dir;
    const std::string digest = config_digest(config);
    write_text(out / "config.txt", to_config_text(config));

    const fs::path metrics_path = out / "metrics.csv";
    std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
    if (!metrics) throw IoError(fmt::format("cannot write {}", metrics_path.string()));
    write_metrics_header(metrics, digest);

    spdlog::info("training {} timesteps, seed {}, digest {}", config.train.total_timesteps,
                 config.train.seed, digest);
    TrainHooks hooks;
    hooks.on_metrics = [&](const MetricsRow& row) {
      metrics << format_metrics_row(row);
      metrics.flush();
      if (!metrics) throw IoError(fmt::format("write failed for {}", metrics_path.string()));
      spdlog::debug("update {} timestep {} reward {}", row.updates, row.timestep,
                    row.ep_reward_mean);
    };
    hooks.on_checkpoint = [&](const PolicyCheckpoint& c, CheckpointKind kind) {
      fs::path path;
      switch (kind) {
        case CheckpointKind::Periodic:
          path = out / "checkpoints" / fmt::format("step_{}.ckpt", c.timesteps);
          break;
        case CheckpointKind::Best:
          path = out / "best.ckpt";
          break;
        case CheckpointKind::Final:
          path = out / "final.ckpt";
          break;
      }
      std::error_code ec;
      fs::create_directories(path.parent_path(), ec);
      if (ec) throw IoError(fmt::format("cannot create {}", path.parent_path().string()));
      write_checkpoint_file(path, c);
      spdlog::debug("wrote {}", path.string());
    };
    hooks.on_log = [](const std::string& message) { spdlog::info("{}", message); };

    const TrainResult result = train(config, hooks);
    spdlog::info("done: {} updates, best greedy success {:.3f}", result.updates,
                 result.best_success_rate);
  });
}

int cmd_eval(const EvalOptions& options) {
  return guarded([&] {
    if (options.episodes <= 0)
      throw std::invalid_argument(
          fmt::format("--episodes must be positive (got {}); refusing to write an empty report",
                      options.episodes));
    const ResolvedPolicy p = resolve(options.source);
    const EvalReport report = evaluate(p.config.env, p.policy, options.episodes, options.seed);

    nlohmann::json j;
    j["format"] = "loader_rl-eval v1";
    j["config_digest"] = p.digest;
    j["policy"] = p.kind;
    j["checkpoint_timesteps"] = p.timesteps;
    j["learning_rate"] = p.config.train.learning_rate;
    j["seed"] = options.seed;
    j["degenerate_threshold"] = 0.05;
    j["all"] = bucket_json(report.all);
    j["regular"] = bucket_json(report.regular);
    j["degenerate"] = bucket_json(report.degenerate);
    nlohmann::json eps = nlohmann::json::array();
    for (const auto& e : report.episodes) {
      eps.push_back({{"seed", e.seed},
                     {"heading", e.heading},
                     {"total_reward", e.total_reward},
                     {"outcome", std::string(to_string(e.outcome))},
                     {"steps", e.steps},
                     {"stop_error", e.stop_error},
                     {"degenerate", e.degenerate}});
    }
    j["episodes"] = eps;
    write_text(options.report, j.dump(2) + "\n");
    spdlog::info("{} episodes: success {:.3f} (regular {:.3f}), reward mean {:.4f}",
                 report.all.episodes, report.all.success_rate, report.regular.success_rate,
                 report.all.reward_mean);
  });
}

int cmd_replay(const ReplayOptions& options) {
  return guarded([&] {
    const ResolvedPolicy p = resolve(options.source);
    EpisodeTrace trace;
    const EpisodeSummary s =
        run_episode(p.config.env, options.seed, p.policy, &trace, p.digest);
    std::ostringstream os;
    write_trace_csv(os, trace, options.normalized);
    write_text(options.trace, os.str());
    spdlog::info("episode {}: {} steps, reward {:.4f}", to_string(s.outcome), s.steps,
                 s.total_reward);
  });
}

int cmd_emulate(const EmulateOptions& options) {
  return guarded([&] {
    const ResolvedPolicy p = resolve(options.source);
    EmulationConfig emu = p.config.emu;
    if (options.delay) emu.position_delay = *options.delay;
    if (options.rate_scale) emu.rate_scale = *options.rate_scale;
    if (options.brake) emu.brake_model = *options.brake;
    if (options.pid) emu.pid_enabled = *options.pid;
    emu.validate();

    const EmulationTrace t =
        run_emulated_episode(p.policy, p.config.env, emu, options.seed, p.digest);
    std::ostringstream os;
    write_trace_csv(os, t.episode, false, t.extras,
                    {{"position_delay", fmt::format("{}", emu.position_delay)},
                     {"rate_scale", fmt::format("{}", emu.rate_scale)},
                     {"brake_model", std::string(brake_name(emu.brake_model))},
                     {"pid_enabled", emu.pid_enabled ? "true" : "false"},
                     {"braking_onset", fmt::format("{}", t.braking_onset)},
                     {"rest_overshoot", fmt::format("{}", t.overshoot)},
                     {"rest_time", fmt::format("{}", t.rest_time)}});
    write_text(options.trace, os.str());
    spdlog::info("episode {}: braking onset {} s, overshoot at rest {:.3f} m",
                 to_string(t.episode.rows.empty() ? Outcome::Running
                                                  : t.episode.rows.back().outcome),
                 t.braking_onset, t.overshoot);
  });
}

int cmd_plot(const PlotOptions& options) {
  return guarded([&] {
    std::ifstream in(options.metrics, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", options.metrics.string()));
    const MetricsFile metrics = read_metrics_csv(in);
    write_text(options.out, render_reward_svg(metrics));
    spdlog::info("plotted {} rows", metrics.points.size());
  });
}

}  // namespace loader_rl::cli
