#ifndef LOADER_RL_CHECKPOINT_HPP_
#define LOADER_RL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loader_rl/policy.hpp"
#include "loader_rl/ppo.hpp"

namespace loader_rl {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// File layout (all integers and floats little-endian):
//   "LDRLCKPT" | u32 version | str digest | u64 env hash | str config text
//   | str rng state | u64 timesteps | u32 mode | u32 array count
//   | manifest: per array (str name, u32 rank, u64 dims...)
//   | f64 data of every array in manifest order | u64 FNV-1a of all prior bytes
// where str is a u64 byte length followed by the bytes.
struct PolicyCheckpoint {
  std::uint32_t format_version = kCheckpointFormatVersion;
  std::string config_digest;
  std::uint64_t env_config_hash = 0;
  std::string config_text;  // canonical run config, including train.*
  PolicyParams params;
  std::string rng_state;
  std::uint64_t timesteps = 0;

  // Train section of `config_text`.
  TrainConfig train_config() const;

  friend bool operator==(const PolicyCheckpoint&, const PolicyCheckpoint&) = default;
};

std::vector<std::uint8_t> save_checkpoint(const PolicyCheckpoint& checkpoint);

// Throws FormatError on bad magic, version mismatch, truncation, or a
// checksum failure. Nothing is returned on failure.
PolicyCheckpoint load_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint_file(const std::filesystem::path& path,
                           const PolicyCheckpoint& checkpoint);
PolicyCheckpoint read_checkpoint_file(const std::filesystem::path& path);

// Message when the checkpoint's environment hash differs from `env_hash`.
std::optional<std::string> env_mismatch_warning(
    const PolicyCheckpoint& checkpoint, std::uint64_t env_hash);

}  // namespace loader_rl

#endif  // LOADER_RL_CHECKPOINT_HPP_
