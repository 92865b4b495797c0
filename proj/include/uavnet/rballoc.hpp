#pragma once

// Resource-block possession (RBP) maps, the occupied / potential / available
// BS partition for one RB, the outer reward and the RBP pool.

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "uavnet/rng.hpp"
#include "uavnet/world.hpp"

namespace uavnet {

/// B x K binary occupancy matrix: at(b, k) == 1 iff BS b uses RB k for a GUE.
class RbpMap {
 public:
  RbpMap() = default;
  RbpMap(std::size_t n_bs, std::size_t n_rb) : n_bs_(n_bs), n_rb_(n_rb), bits_(n_bs * n_rb, 0) {}

  std::size_t n_bs() const { return n_bs_; }
  std::size_t n_rb() const { return n_rb_; }
  bool at(std::size_t b, std::size_t k) const { return bits_[b * n_rb_ + k] != 0; }
  void set(std::size_t b, std::size_t k, bool v = true) { bits_[b * n_rb_ + k] = v ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Row-major 0/1 encoding, the outer-agent state.
  std::vector<double> as_features() const;

  friend bool operator==(const RbpMap&, const RbpMap&) = default;

 private:
  std::size_t n_bs_ = 0;
  std::size_t n_rb_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct RbPartition {
  int k = 0;
  std::vector<int> occupied;   // BSs using RB k
  std::vector<int> potential;  // BSs idle on RB k
  std::vector<int> available;  // potential BSs with no occupied BS in their tier set
};

/// Occupied and potential sets for RB k; `available` is left empty.
RbPartition partition_bs(const RbpMap& map, int k);

/// Potential BSs b with tier_set(b, p) disjoint from the occupied set.
std::vector<int> available_set(const RbpMap& map, int k, int p, const HexLayout& layout);

/// Full partition including the available set.
RbPartition partition_rb(const RbpMap& map, int k, int p, const HexLayout& layout);

/// |available| / (|available| + |occupied|); 0 when both are empty.
double outer_reward(std::size_t n_available, std::size_t n_occupied);
inline double outer_reward(const RbPartition& part) {
  return outer_reward(part.available.size(), part.occupied.size());
}

enum class PoolGenerator { Greedy, Bernoulli };

struct RbpPoolParams {
  std::size_t pool_size = 22;
  int gues_min = 1;
  int gues_max = 4;
  int tier_p = 1;
  PoolGenerator generator = PoolGenerator::Greedy;
  double bernoulli_p = 0.1;
  int max_resample = 1000;

  void validate() const;
};

/// Pool of RBP maps. The greedy generator draws g_b GUEs per BS (redrawing
/// the whole vector while some tier neighborhood needs more than K RBs) and
/// gives each GUE a random RB not yet used inside its BS's tier set.
std::vector<RbpMap> gen_rbp_pool(const RbpPoolParams& params, std::size_t n_rb,
                                 const HexLayout& layout, std::uint64_t seed);

/// Uniform draw from the pool: the outer-MDP transition kernel.
const RbpMap& pool_step(const std::vector<RbpMap>& pool, Rng& rng);
std::size_t pool_step_index(const std::vector<RbpMap>& pool, Rng& rng);

struct RbpPool {
  RbpPoolParams params;
  std::uint64_t seed = 0;
  std::vector<RbpMap> maps;
};

void to_json(nlohmann::json& j, const RbpPool& pool);
void from_json(const nlohmann::json& j, RbpPool& pool);

}  // namespace uavnet
