#pragma once

// Interleaved outer (D3QN, RB choice) and inner (DDPG, beam choice) training
// loop, its configuration, per-episode log and checkpoints.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavnet/agents.hpp"
#include "uavnet/radioenv.hpp"
#include "uavnet/rballoc.hpp"
#include "uavnet/world.hpp"

namespace uavnet {

struct TrainConfig {
  // scenario
  ItuParams itu;
  std::uint64_t world_seed = 1;
  int n_tiers = 3;
  double isd_m = 450.0;
  double bs_height_m = 25.0;
  double z_up_m = 100.0;
  Trajectory trajectory;
  std::size_t n_rb = 100;
  RbpPoolParams pool;
  std::uint64_t pool_seed = 2;
  RadioParams radio;
  ChannelConfig channel;

  // schedule
  int episodes = 100;
  int epo_outer = 22;
  int epo_inner = 200;
  std::size_t d3qn_batch = 128;
  std::size_t ddpg_batch = 128;
  std::size_t d3qn_capacity = 100000;
  std::size_t ddpg_capacity = 100000;
  D3qnConfig d3qn;
  DdpgConfig ddpg;
  std::uint64_t seed = 0;

  std::size_t n_bs() const { return static_cast<std::size_t>(3 * n_tiers * n_tiers + 3 * n_tiers + 1); }
  std::size_t antennas() const { return static_cast<std::size_t>(radio.antennas); }

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
void from_json(const nlohmann::json& j, TrainConfig& c);

TrainConfig load_config(const std::filesystem::path& path);

BuildingWorld make_world(const TrainConfig& cfg);
RbpPool make_pool(const TrainConfig& cfg, const HexLayout& layout);

struct TrainLogRow {
  int episode = 0;
  double avg_outer_reward = 0.0;
  double avg_inner_reward = 0.0;  // NaN when no inner step ran
  double d3qn_loss = 0.0;         // NaN when no update ran
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double epsilon = 0.0;  // value used during the episode
  double sigma2 = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;

  static constexpr const char* kHeader =
      "episode,avg_outer_reward,avg_inner_reward,d3qn_loss,critic_loss,actor_objective,epsilon,sigma2,seconds";

  void write_csv(std::ostream& os) const;
  static TrainLog read_csv(std::istream& is);
};

struct TrainCounters {
  std::uint64_t outer_transitions = 0;
  std::uint64_t inner_transitions = 0;
  std::uint64_t d3qn_updates = 0;
  std::uint64_t ddpg_updates = 0;
  std::uint64_t target_syncs = 0;
  std::uint64_t skipped_inner_loops = 0;
};

struct TrainResult {
  D3qnAgent d3qn;
  DdpgAgent ddpg;
  /// Snapshots from the episodes with the highest average outer / inner
  /// reward, selected independently.
  std::optional<D3qnAgent> best_d3qn;
  std::optional<DdpgAgent> best_ddpg;
  int best_outer_episode = -1;
  int best_inner_episode = -1;
  TrainLog log;
  TrainCounters counters;
};

using EpisodeCallback = std::function<void(const TrainLogRow&)>;

TrainResult train_hybrid(const TrainConfig& cfg, const BuildingWorld& world,
                         const std::vector<RbpMap>& pool, const EpisodeCallback& on_episode = {});

struct Checkpoint {
  TrainConfig config;
  D3qnAgent d3qn;
  DdpgAgent ddpg;
  int outer_episode = -1;
  int inner_episode = -1;
};

/// Best snapshots when available, final agents otherwise.
Checkpoint make_checkpoint(const TrainConfig& cfg, const TrainResult& result);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// DimensionError unless the checkpoint matches B, K and M.
void require_dims(const Checkpoint& ckpt, std::size_t n_bs, std::size_t n_rb, std::size_t antennas);

}  // namespace uavnet
