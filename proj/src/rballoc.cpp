#include "uavnet/rballoc.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "uavnet/error.hpp"

namespace uavnet {

std::vector<double> RbpMap::as_features() const {
  std::vector<double> f(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) f[i] = bits_[i];
  return f;
}

RbPartition partition_bs(const RbpMap& map, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= map.n_rb()) throw std::out_of_range("RB index out of range");
  RbPartition part;
  part.k = k;
  for (std::size_t b = 0; b < map.n_bs(); ++b)
    (map.at(b, static_cast<std::size_t>(k)) ? part.occupied : part.potential)
        .push_back(static_cast<int>(b));
  return part;
}

std::vector<int> available_set(const RbpMap& map, int k, int p, const HexLayout& layout) {
  return partition_rb(map, k, p, layout).available;
}

RbPartition partition_rb(const RbpMap& map, int k, int p, const HexLayout& layout) {
  if (map.n_bs() != layout.size()) throw DimensionError("RBP map rows do not match the BS layout");
  if (p < 1 || p > 3) throw DomainError("tier order p must lie in [1, 3]");
  RbPartition part = partition_bs(map, k);
  for (int b : part.potential) {
    const bool clear = std::none_of(part.occupied.begin(), part.occupied.end(),
                                    [&](int o) { return layout.in_tier(b, o, p); });
    if (clear) part.available.push_back(b);
  }
  return part;
}

double outer_reward(std::size_t n_available, std::size_t n_occupied) {
  const std::size_t den = n_available + n_occupied;
  return den == 0 ? 0.0 : static_cast<double>(n_available) / static_cast<double>(den);
}

void RbpPoolParams::validate() const {
  if (pool_size == 0) throw ConfigError("RBP pool must not be empty");
  if (gues_min < 0 || gues_max < gues_min) throw ConfigError("invalid GUE-per-BS range");
  if (tier_p < 1 || tier_p > 3) throw ConfigError("tier order p must lie in [1, 3]");
  if (!(bernoulli_p >= 0.0 && bernoulli_p <= 1.0)) throw ConfigError("bernoulli_p must lie in [0, 1]");
  if (max_resample < 1) throw ConfigError("max_resample must be >= 1");
}

namespace {

std::optional<RbpMap> color_map(const std::vector<int>& g, std::size_t n_rb,
                               const std::vector<std::vector<int>>& tiers, Rng& rng) {
  const std::size_t n_bs = g.size();
  RbpMap map(n_bs, n_rb);
  std::vector<int> free_rbs;
  for (std::size_t b = 0; b < n_bs; ++b) {
    for (int gue = 0; gue < g[b]; ++gue) {
      free_rbs.clear();
      for (std::size_t k = 0; k < n_rb; ++k) {
        const bool used = std::any_of(tiers[b].begin(), tiers[b].end(), [&](int t) {
          return map.at(static_cast<std::size_t>(t), k);
        });
        if (!used) free_rbs.push_back(static_cast<int>(k));
      }
      if (free_rbs.empty()) return std::nullopt;
      map.set(b, static_cast<std::size_t>(free_rbs[rng.index(free_rbs.size())]));
    }
  }
  return map;
}

RbpMap greedy_map(const RbpPoolParams& params, std::size_t n_rb, const HexLayout& layout,
                  const std::vector<std::vector<int>>& tiers, Rng& rng) {
  const std::size_t n_bs = layout.size();
  std::vector<int> g(n_bs);
  int worst_bs = -1;
  for (int attempt = 0; attempt < params.max_resample; ++attempt) {
    for (auto& v : g) v = params.gues_min + static_cast<int>(rng.index(params.gues_max - params.gues_min + 1));
    worst_bs = -1;
    for (std::size_t b = 0; b < n_bs && worst_bs < 0; ++b) {
      int total = 0;
      for (int t : tiers[b]) total += g[static_cast<std::size_t>(t)];
      if (static_cast<std::size_t>(total) > n_rb) worst_bs = static_cast<int>(b);
    }
    if (worst_bs >= 0) continue;
    if (auto map = color_map(g, n_rb, tiers, rng)) return std::move(*map);
  }
  std::ostringstream os;
  if (worst_bs >= 0)
    os << "RBP pool infeasible: tier neighborhood of BS " << worst_bs << " needs more than " << n_rb
       << " RBs in every draw";
  else
    os << "RBP pool generation ran out of RBs in all " << params.max_resample << " attempts";
  throw ConfigError(os.str());
}

}  // namespace

std::vector<RbpMap> gen_rbp_pool(const RbpPoolParams& params, std::size_t n_rb,
                                 const HexLayout& layout, std::uint64_t seed) {
  params.validate();
  if (n_rb == 0) throw ConfigError("number of RBs must be positive");
  Rng rng(derive_seed(seed, "rbp-pool"));
  std::vector<std::vector<int>> tiers(layout.size());
  for (std::size_t b = 0; b < layout.size(); ++b)
    tiers[b] = layout.tier_set(static_cast<int>(b), params.tier_p);

  std::vector<RbpMap> pool;
  pool.reserve(params.pool_size);
  for (std::size_t i = 0; i < params.pool_size; ++i) {
    if (params.generator == PoolGenerator::Greedy) {
      pool.push_back(greedy_map(params, n_rb, layout, tiers, rng));
    } else {
      RbpMap map(layout.size(), n_rb);
      for (std::size_t b = 0; b < layout.size(); ++b)
        for (std::size_t k = 0; k < n_rb; ++k) map.set(b, k, rng.uniform() < params.bernoulli_p);
      pool.push_back(std::move(map));
    }
  }
  return pool;
}

std::size_t pool_step_index(const std::vector<RbpMap>& pool, Rng& rng) {
  if (pool.empty()) throw std::logic_error("cannot step an empty RBP pool");
  return rng.index(pool.size());
}

const RbpMap& pool_step(const std::vector<RbpMap>& pool, Rng& rng) {
  return pool[pool_step_index(pool, rng)];
}

void to_json(nlohmann::json& j, const RbpPool& pool) {
  using nlohmann::json;
  const auto& p = pool.params;
  j = json::object();
  j["params"] = {{"pool_size", p.pool_size},
                 {"gues_min", p.gues_min},
                 {"gues_max", p.gues_max},
                 {"tier_p", p.tier_p},
                 {"generator", p.generator == PoolGenerator::Greedy ? "greedy" : "bernoulli"},
                 {"bernoulli_p", p.bernoulli_p},
                 {"max_resample", p.max_resample}};
  j["seed"] = pool.seed;
  const std::size_t n_bs = pool.maps.empty() ? 0 : pool.maps.front().n_bs();
  const std::size_t n_rb = pool.maps.empty() ? 0 : pool.maps.front().n_rb();
  j["n_bs"] = n_bs;
  j["n_rb"] = n_rb;
  json maps = json::array();
  for (const auto& m : pool.maps) maps.push_back(m.bits());
  j["maps"] = std::move(maps);
}

void from_json(const nlohmann::json& j, RbpPool& pool) {
  try {
    const auto& p = j.at("params");
    pool.params.pool_size = p.at("pool_size").get<std::size_t>();
    pool.params.gues_min = p.at("gues_min").get<int>();
    pool.params.gues_max = p.at("gues_max").get<int>();
    pool.params.tier_p = p.at("tier_p").get<int>();
    const auto gen = p.at("generator").get<std::string>();
    if (gen != "greedy" && gen != "bernoulli") throw ConfigError("unknown pool generator: " + gen);
    pool.params.generator = gen == "greedy" ? PoolGenerator::Greedy : PoolGenerator::Bernoulli;
    pool.params.bernoulli_p = p.value("bernoulli_p", 0.1);
    pool.params.max_resample = p.value("max_resample", 1000);
    pool.seed = j.at("seed").get<std::uint64_t>();
    const auto n_bs = j.at("n_bs").get<std::size_t>();
    const auto n_rb = j.at("n_rb").get<std::size_t>();
    pool.maps.clear();
    for (const auto& m : j.at("maps")) {
      const auto bits = m.get<std::vector<int>>();
      if (bits.size() != n_bs * n_rb) throw DimensionError("RBP map has wrong number of entries");
      RbpMap map(n_bs, n_rb);
      for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1) throw ConfigError("RBP map entries must be 0 or 1");
        map.set(i / n_rb, i % n_rb, bits[i] == 1);
      }
      pool.maps.push_back(std::move(map));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed pool document: ") + e.what());
  }
}

}  // namespace uavnet
