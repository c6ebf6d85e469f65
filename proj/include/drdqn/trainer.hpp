#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "drdqn/agents.hpp"
#include "drdqn/checkpoint.hpp"
#include "drdqn/metrics.hpp"
#include "drdqn/oracle.hpp"

namespace drdqn {

struct TrainOptions {
  AgentConfig config = AgentConfig::desk();
  std::string env_name = "grid";
  AgentKind kind = AgentKind::dqn;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: keep everything in memory
  std::string network;            // empty: the environment's default preset
  bool wall_clock = false;        // record real elapsed time in metrics
};

struct TrainResult {
  Checkpoint checkpoint;
  std::uint64_t episodes = 0;
};

/// Preset used when none is requested: `mlp` for the grids, `compact-conv` for catch.
std::string default_network(std::string_view env_name);

/// Builds the agent for `kind` on `env` with parameters drawn from `seed`.
Agent make_agent(const AgentConfig& config, const Environment& env, AgentKind kind, std::uint64_t seed,
                 std::string_view network = {});

/// Warmup with random actions for replay_start_size transitions, then
/// `iterations` epsilon-greedy agent steps with a gradient step every
/// sgd_period actions and a target sync every target_sync_period updates.
/// Writes metrics.csv (one row per finished episode) and final.ckpt into
/// out_dir when it is set.
TrainResult train(const TrainOptions& options);

/// Greedy returns over `episodes`, episode e seeded from (seed, e) so the
/// result does not depend on how episodes are split across `threads`.
ReturnStats evaluate_agent(const Agent& agent, const Environment& env, std::size_t episodes, std::uint64_t seed,
                           unsigned threads = 1);

ReturnStats evaluate(const std::filesystem::path& checkpoint_path, std::string_view env_name, std::size_t episodes,
                     std::uint64_t seed, unsigned threads = 1);

}  // namespace drdqn
