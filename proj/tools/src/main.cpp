#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "loader_rl/cli/commands.hpp"
#include "loader_rl/run_config.hpp"

namespace {

using loader_rl::cli::PolicySource;

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("loader_rl");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("LOADER_RL_LOG")) {
    const std::string l = level;
    if (l == "error") spdlog::set_level(spdlog::level::err);
    else if (l == "debug") spdlog::set_level(spdlog::level::debug);
    else if (l != "info") spdlog::warn("LOADER_RL_LOG={} not understood, using info", l);
  }
}

void add_source(CLI::App* cmd, PolicySource& source) {
  auto* ckpt = cmd->add_option("--checkpoint", source.checkpoint, "Trained checkpoint");
  auto* oracle = cmd->add_flag("--oracle", source.oracle, "Use the scripted reference policy");
  ckpt->excludes(oracle);
  cmd->add_option("--config", source.config,
                  "Run config (environment for --oracle; checked against the checkpoint)");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  namespace cli = loader_rl::cli;

  CLI::App app{"Wheel-loader approach training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "loader_rl 0.1.0");

  cli::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a PPO policy");
  train_cmd->add_option("config", train.config, "Run config file")->required();
  train_cmd->add_option("--seed", train.seed, "Override the config seed");
  train_cmd->add_option("--out", train.out, "Output directory");
  train_cmd->add_option("--total-timesteps", train.total_timesteps, "Override the budget");

  cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation report (JSON)");
  add_source(eval_cmd, eval.source);
  eval_cmd->add_option("--episodes", eval.episodes, "Number of episodes")->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Evaluation seed")->capture_default_str();
  eval_cmd->add_option("--report", eval.report, "Report path")->required();

  cli::ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Write one episode trace");
  add_source(replay_cmd, replay.source);
  replay_cmd->add_option("--seed", replay.seed, "Episode seed")->capture_default_str();
  replay_cmd->add_option("--trace", replay.trace, "Trace CSV path")->required();
  replay_cmd->add_flag("--normalized", replay.normalized, "Scale columns to [0, 1]");

  cli::EmulateOptions emulate;
  std::string brake;
  auto* emulate_cmd = app.add_subcommand("emulate", "Run one episode under deployment effects");
  add_source(emulate_cmd, emulate.source);
  emulate_cmd->add_option("--seed", emulate.seed, "Episode seed")->capture_default_str();
  emulate_cmd->add_option("--trace", emulate.trace, "Extended trace CSV path")->required();
  emulate_cmd->add_option("--delay", emulate.delay, "Position delay in seconds");
  emulate_cmd->add_option("--rate-scale", emulate.rate_scale, "Controller rate / plant rate");
  emulate_cmd->add_option("--brake", brake, "Brake model")
      ->check(CLI::IsMember({"ideal", "tapered"}));
  emulate_cmd->add_flag("--pid,!--no-pid", emulate.pid, "Enable or disable the PID throttle");

  cli::PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render the reward curve as SVG");
  plot_cmd->add_option("--metrics", plot.metrics, "metrics.csv from train")->required();
  plot_cmd->add_option("--out", plot.out, "SVG path")->required();

  app.add_subcommand("dump-config", "Print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitValidation;
  }

  if (*train_cmd) return cli::cmd_train(train);
  if (*eval_cmd) return cli::cmd_eval(eval);
  if (*replay_cmd) return cli::cmd_replay(replay);
  if (*emulate_cmd) {
    if (!brake.empty())
      emulate.brake = brake == "ideal" ? loader_rl::BrakeModel::Ideal
                                       : loader_rl::BrakeModel::Tapered;
    return cli::cmd_emulate(emulate);
  }
  if (*plot_cmd) return cli::cmd_plot(plot);
  std::cout << loader_rl::to_config_text(loader_rl::RunConfig{});
  return cli::kExitOk;
}
