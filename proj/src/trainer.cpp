#include "uavnet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "uavnet/error.hpp"

namespace uavnet {

namespace {

using nlohmann::json;

/// Reads optional keys of one JSON object and rejects the ones never asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown configuration key '" + where_ + "." + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json vec3(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void TrainConfig::validate() const {
  itu.validate();
  trajectory.validate();
  pool.validate();
  radio.validate();
  channel.validate();
  d3qn.validate();
  ddpg.validate();
  if (n_tiers < 0) throw ConfigError("n_tiers must be >= 0");
  if (n_rb < 1) throw ConfigError("n_rb (K) must be >= 1");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (epo_inner < 0) throw ConfigError("epo_inner must be >= 0");
  if (epo_outer != trajectory.n_slots())
    throw ConfigError("epo_outer (" + std::to_string(epo_outer) + ") must equal the trajectory slot count (" +
                      std::to_string(trajectory.n_slots()) + ")");
  if (d3qn_batch < 1 || ddpg_batch < 1) throw ConfigError("batch sizes must be >= 1");
  if (d3qn_batch > d3qn_capacity) throw ConfigError("d3qn_batch exceeds d3qn_capacity");
  if (ddpg_batch > ddpg_capacity) throw ConfigError("ddpg_batch exceeds ddpg_capacity");
  if (!(z_up_m >= trajectory.start.z && z_up_m >= trajectory.end.z))
    throw ConfigError("z_up_m must cover the trajectory altitude");
  if (!(trajectory.start.z > bs_height_m && trajectory.end.z > bs_height_m))
    throw ConfigError("the DUE must fly above the BS antennas");
}

void to_json(json& j, const TrainConfig& c) {
  j = json::object();
  j["itu"] = {{"alpha", c.itu.alpha},
              {"beta_per_km2", c.itu.beta_per_km2},
              {"gamma_m", c.itu.gamma_m},
              {"side_km", c.itu.side_km},
              {"road_width_km", c.itu.road_width_km},
              {"clusters_per_side", c.itu.clusters_per_side},
              {"height_clip_m", c.itu.height_clip_m}};
  j["world_seed"] = c.world_seed;
  j["n_tiers"] = c.n_tiers;
  j["isd_m"] = c.isd_m;
  j["bs_height_m"] = c.bs_height_m;
  j["z_up_m"] = c.z_up_m;
  j["trajectory"] = {{"start", vec3(c.trajectory.start)},
                     {"end", vec3(c.trajectory.end)},
                     {"velocity_mps", c.trajectory.velocity_mps},
                     {"slot_duration_s", c.trajectory.slot_duration_s}};
  j["n_rb"] = c.n_rb;
  j["pool"] = {{"pool_size", c.pool.pool_size},
               {"gues_min", c.pool.gues_min},
               {"gues_max", c.pool.gues_max},
               {"tier_p", c.pool.tier_p},
               {"generator", c.pool.generator == PoolGenerator::Greedy ? "greedy" : "bernoulli"},
               {"bernoulli_p", c.pool.bernoulli_p},
               {"max_resample", c.pool.max_resample}};
  j["pool_seed"] = c.pool_seed;
  j["radio"] = {{"p_dbm", c.radio.p_dbm},
                {"sigma2_dbm", c.radio.sigma2_dbm},
                {"gamma_th_db", c.radio.gamma_th_db},
                {"varsigma", c.radio.varsigma},
                {"antennas", c.radio.antennas}};
  j["channel"] = {{"fc_ghz", c.channel.fc_ghz},
                  {"m_los", c.channel.m_los},
                  {"m_nlos", c.channel.m_nlos},
                  {"rho", c.channel.rho},
                  {"omega", c.channel.omega}};
  j["episodes"] = c.episodes;
  j["epo_outer"] = c.epo_outer;
  j["epo_inner"] = c.epo_inner;
  j["d3qn_batch"] = c.d3qn_batch;
  j["ddpg_batch"] = c.ddpg_batch;
  j["d3qn_capacity"] = c.d3qn_capacity;
  j["ddpg_capacity"] = c.ddpg_capacity;
  j["d3qn"] = {{"hidden", c.d3qn.hidden},
               {"lr", c.d3qn.lr},
               {"gamma", c.d3qn.gamma},
               {"sync_every", c.d3qn.sync_every},
               {"eps0", c.d3qn.eps0},
               {"eps_decay", c.d3qn.eps_decay},
               {"terminal_cutoff", c.d3qn.terminal_cutoff}};
  j["ddpg"] = {{"actor_hidden", c.ddpg.actor_hidden},
               {"critic_hidden", c.ddpg.critic_hidden},
               {"actor_lr", c.ddpg.actor_lr},
               {"critic_lr", c.ddpg.critic_lr},
               {"gamma", c.ddpg.gamma},
               {"tau", c.ddpg.tau},
               {"sigma2", c.ddpg.sigma2},
               {"sigma_decay", c.ddpg.sigma_decay},
               {"terminal_cutoff", c.ddpg.terminal_cutoff}};
  j["seed"] = c.seed;
}

void from_json(const json& j, TrainConfig& c) {
  Fields f(j, "config");
  if (const auto* s = f.child("itu")) {
    Fields g(*s, "itu");
    g.read("alpha", c.itu.alpha);
    g.read("beta_per_km2", c.itu.beta_per_km2);
    g.read("gamma_m", c.itu.gamma_m);
    g.read("side_km", c.itu.side_km);
    g.read("road_width_km", c.itu.road_width_km);
    g.read("clusters_per_side", c.itu.clusters_per_side);
    g.read("height_clip_m", c.itu.height_clip_m);
    g.finish();
  }
  f.read("world_seed", c.world_seed);
  f.read("n_tiers", c.n_tiers);
  f.read("isd_m", c.isd_m);
  f.read("bs_height_m", c.bs_height_m);
  f.read("z_up_m", c.z_up_m);
  if (const auto* s = f.child("trajectory")) {
    Fields g(*s, "trajectory");
    if (const auto* v = g.child("start")) c.trajectory.start = vec3_from(*v, "trajectory.start");
    if (const auto* v = g.child("end")) c.trajectory.end = vec3_from(*v, "trajectory.end");
    g.read("velocity_mps", c.trajectory.velocity_mps);
    g.read("slot_duration_s", c.trajectory.slot_duration_s);
    g.finish();
  }
  f.read("n_rb", c.n_rb);
  if (const auto* s = f.child("pool")) {
    Fields g(*s, "pool");
    g.read("pool_size", c.pool.pool_size);
    g.read("gues_min", c.pool.gues_min);
    g.read("gues_max", c.pool.gues_max);
    g.read("tier_p", c.pool.tier_p);
    std::string gen = c.pool.generator == PoolGenerator::Greedy ? "greedy" : "bernoulli";
    g.read("generator", gen);
    if (gen != "greedy" && gen != "bernoulli") throw ConfigError("pool.generator must be greedy or bernoulli");
    c.pool.generator = gen == "greedy" ? PoolGenerator::Greedy : PoolGenerator::Bernoulli;
    g.read("bernoulli_p", c.pool.bernoulli_p);
    g.read("max_resample", c.pool.max_resample);
    g.finish();
  }
  f.read("pool_seed", c.pool_seed);
  if (const auto* s = f.child("radio")) {
    Fields g(*s, "radio");
    g.read("p_dbm", c.radio.p_dbm);
    g.read("sigma2_dbm", c.radio.sigma2_dbm);
    g.read("gamma_th_db", c.radio.gamma_th_db);
    g.read("varsigma", c.radio.varsigma);
    g.read("antennas", c.radio.antennas);
    g.finish();
  }
  if (const auto* s = f.child("channel")) {
    Fields g(*s, "channel");
    g.read("fc_ghz", c.channel.fc_ghz);
    g.read("m_los", c.channel.m_los);
    g.read("m_nlos", c.channel.m_nlos);
    g.read("rho", c.channel.rho);
    g.read("omega", c.channel.omega);
    g.finish();
  }
  f.read("episodes", c.episodes);
  f.read("epo_outer", c.epo_outer);
  f.read("epo_inner", c.epo_inner);
  f.read("d3qn_batch", c.d3qn_batch);
  f.read("ddpg_batch", c.ddpg_batch);
  f.read("d3qn_capacity", c.d3qn_capacity);
  f.read("ddpg_capacity", c.ddpg_capacity);
  if (const auto* s = f.child("d3qn")) {
    Fields g(*s, "d3qn");
    g.read("hidden", c.d3qn.hidden);
    g.read("lr", c.d3qn.lr);
    g.read("gamma", c.d3qn.gamma);
    g.read("sync_every", c.d3qn.sync_every);
    g.read("eps0", c.d3qn.eps0);
    g.read("eps_decay", c.d3qn.eps_decay);
    g.read("terminal_cutoff", c.d3qn.terminal_cutoff);
    g.finish();
  }
  if (const auto* s = f.child("ddpg")) {
    Fields g(*s, "ddpg");
    g.read("actor_hidden", c.ddpg.actor_hidden);
    g.read("critic_hidden", c.ddpg.critic_hidden);
    g.read("actor_lr", c.ddpg.actor_lr);
    g.read("critic_lr", c.ddpg.critic_lr);
    g.read("gamma", c.ddpg.gamma);
    g.read("tau", c.ddpg.tau);
    g.read("sigma2", c.ddpg.sigma2);
    g.read("sigma_decay", c.ddpg.sigma_decay);
    g.read("terminal_cutoff", c.ddpg.terminal_cutoff);
    g.finish();
  }
  f.read("seed", c.seed);
  f.finish();
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return j.get<TrainConfig>();
}

BuildingWorld make_world(const TrainConfig& cfg) {
  return BuildingWorld::generate(cfg.itu, cfg.world_seed, cfg.n_tiers, cfg.isd_m, cfg.bs_height_m, cfg.z_up_m);
}

RbpPool make_pool(const TrainConfig& cfg, const HexLayout& layout) {
  return {cfg.pool, cfg.pool_seed, gen_rbp_pool(cfg.pool, cfg.n_rb, layout, cfg.pool_seed)};
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

}  // namespace

void TrainLog::write_csv(std::ostream& os) const {
  os << kHeader << '\n';
  for (const auto& r : rows)
    os << r.episode << ',' << fmt(r.avg_outer_reward) << ',' << fmt(r.avg_inner_reward) << ','
       << fmt(r.d3qn_loss) << ',' << fmt(r.critic_loss) << ',' << fmt(r.actor_objective) << ','
       << fmt(r.epsilon) << ',' << fmt(r.sigma2) << ',' << fmt(r.seconds) << '\n';
}

TrainLog TrainLog::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw ConfigError("training log has an unexpected header");
  TrainLog log;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 9) throw ConfigError("training log row has " + std::to_string(cells.size()) + " cells");
    try {
      TrainLogRow r;
      r.episode = std::stoi(cells[0]);
      r.avg_outer_reward = parse_double(cells[1]);
      r.avg_inner_reward = parse_double(cells[2]);
      r.d3qn_loss = parse_double(cells[3]);
      r.critic_loss = parse_double(cells[4]);
      r.actor_objective = parse_double(cells[5]);
      r.epsilon = parse_double(cells[6]);
      r.sigma2 = parse_double(cells[7]);
      r.seconds = parse_double(cells[8]);
      log.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("training log row is not numeric: " + line);
    }
  }
  return log;
}

namespace {

struct Mean {
  double sum = 0.0;
  std::uint64_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double value() const { return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(); }
};

}  // namespace

TrainResult train_hybrid(const TrainConfig& cfg, const BuildingWorld& world,
                         const std::vector<RbpMap>& pool, const EpisodeCallback& on_episode) {
  cfg.validate();
  if (pool.empty()) throw ConfigError("training needs a non-empty RBP pool");
  if (pool.front().n_bs() != world.layout.size() || pool.front().n_rb() != cfg.n_rb)
    throw DimensionError("RBP pool is " + std::to_string(pool.front().n_bs()) + " x " +
                         std::to_string(pool.front().n_rb()) + ", scenario is " +
                         std::to_string(world.layout.size()) + " x " + std::to_string(cfg.n_rb));

  Rng init_rng(derive_seed(cfg.seed, "agent-init"));
  Rng rng(derive_seed(cfg.seed, "trainer"));
  const std::size_t state_dim = world.layout.size() * cfg.n_rb;
  TrainResult res{D3qnAgent(state_dim, cfg.n_rb, cfg.d3qn, init_rng),
                  DdpgAgent(cfg.antennas(), cfg.ddpg, init_rng), std::nullopt, std::nullopt, -1, -1, {}, {}};

  std::vector<Features> features;
  features.reserve(pool.size());
  for (const auto& m : pool) features.push_back(std::make_shared<const std::vector<double>>(m.as_features()));

  ReplayBuffer<DiscreteTransition> outer_buf(cfg.d3qn_capacity);
  ReplayBuffer<ContinuousTransition> inner_buf(cfg.ddpg_capacity);
  OuterEnv outer(pool, world.layout, cfg.pool.tier_p, cfg.epo_outer, cfg.seed);
  InnerEnv inner(world, cfg.channel, cfg.antennas(), cfg.seed);

  double best_outer = -std::numeric_limits<double>::infinity();
  double best_inner = -std::numeric_limits<double>::infinity();

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    Mean outer_r, inner_r, d3qn_loss, critic_loss, actor_obj;
    TrainLogRow row;
    row.episode = ep;
    row.epsilon = res.d3qn.epsilon();
    row.sigma2 = res.ddpg.sigma2();

    outer.reset();
    for (int n = 0; n < cfg.epo_outer; ++n) {
      const Features s = features[outer.state_index()];
      const int k = res.d3qn.act(*s, rng);
      const auto part = outer.partition(k);

      if (auto st = inner.reset(part.available, cfg.trajectory.position(n))) {
        auto x = st->features();
        for (int t = 0; t < cfg.epo_inner; ++t) {
          auto a = res.ddpg.act_explore(x, rng);
          auto step = inner.step(a);
          auto x_next = step.next.features();
          inner_r.add(step.reward);
          inner_buf.push({x, std::move(a), step.reward, x_next, t + 1 == cfg.epo_inner});
          ++res.counters.inner_transitions;
          if (inner_buf.size() >= cfg.ddpg_batch) {
            const auto batch = inner_buf.sample(cfg.ddpg_batch, rng);
            critic_loss.add(res.ddpg.critic_update(batch));
            actor_obj.add(res.ddpg.actor_update(batch));
            res.ddpg.soft_update_targets();
            ++res.counters.ddpg_updates;
          }
          x = std::move(x_next);
        }
      } else {
        ++res.counters.skipped_inner_loops;
      }

      const auto step = outer.step(k);
      outer_r.add(step.reward);
      outer_buf.push({s, k, step.reward, features[outer.state_index()], step.done});
      ++res.counters.outer_transitions;
      if (outer_buf.size() >= cfg.d3qn_batch) {
        const auto batch = outer_buf.sample(cfg.d3qn_batch, rng);
        d3qn_loss.add(res.d3qn.update(batch));
        ++res.counters.d3qn_updates;
      }
    }

    res.d3qn.decay_epsilon();
    res.ddpg.decay_sigma();

    row.avg_outer_reward = outer_r.value();
    row.avg_inner_reward = inner_r.value();
    row.d3qn_loss = d3qn_loss.value();
    row.critic_loss = critic_loss.value();
    row.actor_objective = actor_obj.value();
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (row.avg_outer_reward > best_outer) {
      best_outer = row.avg_outer_reward;
      res.best_d3qn = res.d3qn;
      res.best_outer_episode = ep;
    }
    if (inner_r.n && row.avg_inner_reward > best_inner) {
      best_inner = row.avg_inner_reward;
      res.best_ddpg = res.ddpg;
      res.best_inner_episode = ep;
    }
    res.log.rows.push_back(row);
    if (on_episode) on_episode(row);
  }
  res.counters.target_syncs = res.d3qn.syncs();
  return res;
}

Checkpoint make_checkpoint(const TrainConfig& cfg, const TrainResult& result) {
  return {cfg, result.best_d3qn ? *result.best_d3qn : result.d3qn,
          result.best_ddpg ? *result.best_ddpg : result.ddpg, result.best_outer_episode,
          result.best_inner_episode};
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json j = {{"format", "uavnet-checkpoint"},
            {"version", 1},
            {"config", ckpt.config},
            {"dims", {{"n_bs", ckpt.config.n_bs()}, {"n_rb", ckpt.config.n_rb}, {"antennas", ckpt.config.antennas()}}},
            {"d3qn", ckpt.d3qn},
            {"ddpg", ckpt.ddpg},
            {"outer_episode", ckpt.outer_episode},
            {"inner_episode", ckpt.inner_episode}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << j.dump();
  if (!out) throw std::runtime_error("failed while writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint not found: " + path.string());
  json j;
  try {
    in >> j;
    if (j.at("format").get<std::string>() != "uavnet-checkpoint" || j.at("version").get<int>() != 1)
      throw ConfigError("unsupported checkpoint format in " + path.string());
    auto cfg = j.at("config").get<TrainConfig>();
    Rng scratch(0);
    Checkpoint ck{cfg, D3qnAgent(cfg.n_bs() * cfg.n_rb, cfg.n_rb, cfg.d3qn, scratch),
                  DdpgAgent(cfg.antennas(), cfg.ddpg, scratch), j.at("outer_episode").get<int>(),
                  j.at("inner_episode").get<int>()};
    ck.d3qn.load(j.at("d3qn"));
    ck.ddpg.load(j.at("ddpg"));
    return ck;
  } catch (const json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

void require_dims(const Checkpoint& ckpt, std::size_t n_bs, std::size_t n_rb, std::size_t antennas) {
  const auto& c = ckpt.config;
  if (c.n_bs() != n_bs || c.n_rb != n_rb || c.antennas() != antennas)
    throw DimensionError("checkpoint was trained for B=" + std::to_string(c.n_bs()) + ", K=" +
                         std::to_string(c.n_rb) + ", M=" + std::to_string(c.antennas()) +
                         " but the scenario has B=" + std::to_string(n_bs) + ", K=" + std::to_string(n_rb) +
                         ", M=" + std::to_string(antennas));
}

}  // namespace uavnet
