#include "uavnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "uavnet/error.hpp"

namespace uavnet {

const std::vector<NamedPolicy>& named_policies() {
  static const std::vector<NamedPolicy> p{
      {"rr-wo-bd", {RbPolicy::Random, BeamKind::Random}},
      {"rr-w-bd", {RbPolicy::Random, BeamKind::Ddpg}},
      {"rr-w-mrt", {RbPolicy::Random, BeamKind::Mrt}},
      {"er-w-bd", {RbPolicy::Exhaustive, BeamKind::Ddpg}},
      {"er-w-mrt", {RbPolicy::Exhaustive, BeamKind::Mrt}},
      {"proposed", {RbPolicy::D3qn, BeamKind::Ddpg}},
  };
  return p;
}

const NamedPolicy& policy_by_name(std::string_view name) {
  for (const auto& p : named_policies())
    if (p.name == name) return p;
  throw ConfigError("unknown policy '" + std::string(name) +
                    "' (expected rr-wo-bd, rr-w-bd, rr-w-mrt, er-w-bd, er-w-mrt or proposed)");
}

int rb_exhaustive(const RbpMap& map, int p, const HexLayout& layout) {
  int best = 0;
  double best_r = -1.0;
  for (std::size_t k = 0; k < map.n_rb(); ++k) {
    const double r = outer_reward(partition_rb(map, static_cast<int>(k), p, layout));
    if (r > best_r) {
      best_r = r;
      best = static_cast<int>(k);
    }
  }
  return best;
}

ComplexVec DdpgBeamPolicy::beam(const ComplexVec& est, LinkType link, Rng&) {
  const InnerState st{est, link == LinkType::LoS};
  return actor_to_beam(agent_->act(st.features()));
}

EvalScenario EvalScenario::from_config(const TrainConfig& cfg, const BuildingWorld& world,
                                       const std::vector<RbpMap>& pool) {
  return {&world, &pool, cfg.trajectory, cfg.radio, cfg.channel, cfg.pool.tier_p};
}

EvalResult evaluate_eod(const EvalScenario& sc, const NamedPolicy& policy, const Checkpoint* agents,
                        std::uint64_t seed) {
  if (!sc.world || !sc.pool || sc.pool->empty()) throw ConfigError("evaluation needs a world and a non-empty pool");
  sc.radio.validate();
  const auto& kind = policy.kind;
  if (kind.needs_agents()) {
    if (!agents) throw ConfigError("policy '" + policy.name + "' needs a trained checkpoint");
    require_dims(*agents, sc.world->layout.size(), sc.pool->front().n_rb(),
                 static_cast<std::size_t>(sc.radio.antennas));
  }

  MrtBeamPolicy mrt_policy;
  RandomBeamPolicy random_policy;
  std::optional<DdpgBeamPolicy> ddpg_policy;
  if (kind.beam == BeamKind::Ddpg) ddpg_policy.emplace(agents->ddpg);
  BeamPolicy& beams = kind.beam == BeamKind::Mrt    ? static_cast<BeamPolicy&>(mrt_policy)
                      : kind.beam == BeamKind::Ddpg ? static_cast<BeamPolicy&>(*ddpg_policy)
                                                    : static_cast<BeamPolicy&>(random_policy);
  const NakagamiFading fading(sc.channel);

  EvalResult out;
  out.policy = policy.name;
  out.seed = seed;
  const int n_slots = sc.trajectory.n_slots();
  for (int n = 0; n < n_slots; ++n) {
    const auto& map = (*sc.pool)[static_cast<std::size_t>(n) % sc.pool->size()];
    int k = 0;
    switch (kind.rb) {
      case RbPolicy::Random: {
        Rng rb_rng(derive_seed(seed, "eval-rb", static_cast<std::uint64_t>(n)));
        k = static_cast<int>(rb_rng.index(map.n_rb()));
        break;
      }
      case RbPolicy::Exhaustive: k = rb_exhaustive(map, sc.tier_p, sc.world->layout); break;
      case RbPolicy::D3qn: k = agents->d3qn.greedy(map.as_features()); break;
    }
    const auto part = partition_rb(map, k, sc.tier_p, sc.world->layout);
    const auto ctx = make_slot_context(*sc.world, sc.trajectory.position(n), n, sc.channel);
    Rng slot_rng(derive_seed(seed, "eval-slot", static_cast<std::uint64_t>(n)));
    out.tops.push_back(estimate_top(ctx, part, beams, sc.radio, sc.channel.rho, fading, slot_rng));
    out.rbs.push_back(k);
  }
  out.eod_s = eod(out.tops, sc.trajectory.slot_duration_s);
  return out;
}

std::string_view axis_name(SweepAxis a) { return a == SweepAxis::Power ? "p_dbm" : "antennas"; }

SweepAxis axis_from_name(std::string_view name) {
  if (name == "p_dbm" || name == "p" || name == "P") return SweepAxis::Power;
  if (name == "antennas" || name == "m" || name == "M") return SweepAxis::Antennas;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (expected p_dbm or antennas)");
}

std::vector<SweepRow> sweep(const EvalScenario& base, SweepAxis axis, const std::vector<double>& values,
                            const std::vector<NamedPolicy>& policies, const std::vector<std::uint64_t>& seeds,
                            const CheckpointFor& checkpoint_for) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    EvalScenario sc = base;
    if (axis == SweepAxis::Power) {
      sc.radio.p_dbm = v;
    } else {
      if (v < 1 || v != std::floor(v)) throw ConfigError("antenna counts must be positive integers");
      sc.radio.antennas = static_cast<int>(v);
    }
    const Checkpoint* ck = checkpoint_for ? checkpoint_for(v) : nullptr;
    for (const auto& p : policies)
      for (auto s : seeds) {
        const auto r = evaluate_eod(sc, p, p.kind.needs_agents() ? ck : nullptr, s);
        rows.push_back({p.name, std::string(axis_name(axis)), v, s, r.eod_s});
      }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows)
    os << r.policy << ',' << r.axis << ',' << std::setprecision(10) << r.value << ',' << r.seed << ','
       << std::setprecision(10) << r.eod_s << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepHeader) throw ConfigError("sweep CSV has an unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5) throw ConfigError("sweep CSV row has " + std::to_string(cells.size()) + " cells");
    try {
      rows.push_back({cells[0], cells[1], std::stod(cells[2]), std::stoull(cells[3]), std::stod(cells[4])});
    } catch (const std::logic_error&) {
      throw ConfigError("sweep CSV row is not numeric: " + line);
    }
  }
  return rows;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman needs two equal-length samples");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace uavnet
