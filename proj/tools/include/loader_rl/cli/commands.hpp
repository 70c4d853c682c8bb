#ifndef LOADER_RL_CLI_COMMANDS_HPP_
#define LOADER_RL_CLI_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "loader_rl/run_config.hpp"
#include "loader_rl/vehicle.hpp"

namespace loader_rl::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitIo = 2,
  kExitNumerical = 3,
};

// Runs `body`, logs any exception, and maps it to an exit code:
// config/argument/state errors -> 1, file and format errors -> 2,
// numerical failures -> 3.
int guarded(const std::function<void()>& body);

// Reads and parses a config file. Diagnostics are prefixed with the path.
RunConfig load_run_config(const std::filesystem::path& path);

// Where a command gets its policy from: a trained checkpoint or the
// scripted oracle. `config` supplies the environment for the oracle and is
// checked against the checkpoint's environment when both are given.
struct PolicySource {
  std::optional<std::filesystem::path> checkpoint;
  bool oracle = false;
  std::optional<std::filesystem::path> config;
};

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<long> total_timesteps;
};

struct EvalOptions {
  PolicySource source;
  int episodes = 100;
  std::uint64_t seed = 0;
  std::filesystem::path report;
};

struct ReplayOptions {
  PolicySource source;
  std::uint64_t seed = 0;
  std::filesystem::path trace;
  bool normalized = false;
};

// Unset fields keep the values from the config (or its defaults).
struct EmulateOptions {
  PolicySource source;
  std::uint64_t seed = 0;
  std::filesystem::path trace;
  std::optional<double> delay;
  std::optional<double> rate_scale;
  std::optional<BrakeModel> brake;
  std::optional<bool> pid;
};

struct PlotOptions {
  std::filesystem::path metrics;
  std::filesystem::path out;
};

// Writes <out>/config.txt, <out>/metrics.csv, <out>/checkpoints/step_N.ckpt,
// <out>/best.ckpt and <out>/final.ckpt.
int cmd_train(const TrainOptions& options);
// JSON report with per-bucket reward mean/variance, success rate and stop
// error. Headings with |sin| or |cos| below 0.05 form their own bucket.
int cmd_eval(const EvalOptions& options);
int cmd_replay(const ReplayOptions& options);
int cmd_emulate(const EmulateOptions& options);
int cmd_plot(const PlotOptions& options);

}  // namespace loader_rl::cli

#endif  // LOADER_RL_CLI_COMMANDS_HPP_
