#ifndef LOADER_RL_RUN_CONFIG_HPP_
#define LOADER_RL_RUN_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "loader_rl/approach_env.hpp"
#include "loader_rl/emulator.hpp"
#include "loader_rl/oracle.hpp"
#include "loader_rl/ppo.hpp"

namespace loader_rl {

// Everything a command needs, loaded from a flat key=value file:
//
//   # comment
//   version = 1
//   seed = 7
//   env.vicinity = 1.5
//   train.learning_rate = 3e-4
//
// `version` is required; every other key is optional and defaults to the
// values below. The seed lives in train.seed and is written as `seed`.
struct RunConfig {
  EnvConfig env;
  TrainConfig train;
  EmulationConfig emu;
  OracleConfig oracle;
  std::string out_dir = "run";

  void validate() const;
};

inline constexpr int kConfigVersion = 1;

// Throws ConfigError with the 1-based line number for unknown keys,
// duplicates, unparsable values, and validation failures tied to a key.
RunConfig parse_run_config(std::string_view text);

// Canonical dump: every key in a fixed order, shortest round-trip numbers.
std::string to_config_text(const RunConfig& config);

// Digest over the canonical dump without the output directory, as 16 hex
// digits.
std::string config_digest(const RunConfig& config);

// Hash of the env.* and vehicle.* keys only.
std::uint64_t env_config_hash(const EnvConfig& config);

std::string hex64(std::uint64_t value);

}  // namespace loader_rl

#endif  // LOADER_RL_RUN_CONFIG_HPP_
