#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "drdqn/agents.hpp"

namespace drdqn {

/// Everything needed to rebuild an agent bit-for-bit.
///
/// On disk: the magic `DRDQ`, a version byte (1), a length-prefixed UTF-8
/// header of `key = value` lines (agent kind, environment, steps, network
/// layers and the full config), then a u32 entry count followed by entries of
/// u32 name length, name, u32 rank, u64 dims and little-endian f64 values.
/// Entries are `online/*`, `target/*` and the optimizer's `opt/*` caches.
struct Checkpoint {
  static constexpr std::uint8_t kVersion = 1;

  AgentConfig config;
  AgentKind kind = AgentKind::dqn;
  std::string env_name;
  NetworkSpec spec;
  ParamSet online;
  ParamSet target;
  ParamSet optimizer_state;
  std::uint64_t step = 0;

  bool operator==(const Checkpoint& other) const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Checkpoint make_checkpoint(const Agent& agent, AgentKind kind, std::string env_name);
Agent restore_agent(const Checkpoint& ckpt);

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace drdqn
