#include "uavnet/radioenv.hpp"

#include <cmath>
#include <stdexcept>

#include "uavnet/error.hpp"

namespace uavnet {

void RadioParams::validate() const {
  if (varsigma < 1) throw ConfigError("varsigma (SINR measurements per slot) must be >= 1");
  if (antennas < 1) throw ConfigError("antenna count M must be >= 1");
  if (!std::isfinite(p_dbm) || !std::isfinite(sigma2_dbm) || !std::isfinite(gamma_th_db))
    throw ConfigError("radio powers and threshold must be finite");
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

SlotContext make_slot_context(const BuildingWorld& world, const Vec3& due, int slot,
                              const ChannelConfig& cfg) {
  SlotContext ctx;
  ctx.slot = slot;
  ctx.due = due;
  ctx.links.reserve(world.layout.size());
  for (const auto& site : world.layout.sites()) {
    BsLink l;
    l.link = los_blocked(site, due, world.buildings) ? LinkType::NLoS : LinkType::LoS;
    l.distance_m = distance(site.position, due);
    l.pathloss_db = pathloss_db(l.link, l.distance_m, due.z, cfg.fc_ghz);
    l.gain = std::pow(10.0, -l.pathloss_db / 10.0);
    ctx.links.push_back(l);
  }
  return ctx;
}

namespace {

void require_unit(std::span<const Complex> w) {
  if (std::abs(norm(w) - 1.0) > 1e-9) throw std::invalid_argument("beam vector must have unit norm");
}

}  // namespace

double sinr(std::span<const LinkDraw> serving, std::span<const LinkDraw> interfering,
            double p_mw, double noise_mw) {
  double signal = 0.0;
  for (const auto& s : serving) {
    require_unit(s.w);
    signal += p_mw * s.gain * std::norm(inner(s.h, s.w));
  }
  double interference = 0.0;
  for (const auto& s : interfering) {
    require_unit(s.w);
    interference += p_mw * s.gain * std::norm(inner(s.h, s.w));
  }
  return signal / (interference + noise_mw);
}

int itop(double sinr_linear, double gamma_th_db) {
  return sinr_linear < db_to_linear(gamma_th_db) ? 1 : 0;
}

ComplexVec RandomBeamPolicy::beam(const ComplexVec& est, LinkType, Rng& rng) {
  for (;;) {
    auto w = sample_rayleigh(est.size(), rng);
    const double n = norm(w);
    if (n > 0.0) {
      for (auto& c : w) c /= n;
      return w;
    }
  }
}

double estimate_top(const SlotContext& ctx, const RbPartition& part, BeamPolicy& policy,
                    const RadioParams& params, double rho, const FadingModel& fading, Rng& rng) {
  if (params.varsigma < 1) throw ConfigError("varsigma must be >= 1");
  if (part.available.empty()) return 1.0;

  const auto m = static_cast<std::size_t>(params.antennas);
  const double p_mw = dbm_to_mw(params.p_dbm);
  const double noise_mw = dbm_to_mw(params.sigma2_dbm);
  const double threshold = db_to_linear(params.gamma_th_db);

  std::size_t outages = 0;
  for (int i = 0; i < params.varsigma; ++i) {
    double signal = 0.0;
    for (int b : part.available) {
      const auto& l = ctx.links[static_cast<std::size_t>(b)];
      auto csi = compose_imperfect_csi(fading.b2u(l.link, m, rng), rho, l.link, rng);
      const auto w = policy.beam(csi.est, l.link, rng);
      require_unit(w);
      signal += p_mw * l.gain * std::norm(inner(csi.truth, w));
    }
    double interference = 0.0;
    for (int b : part.occupied) {
      const auto& l = ctx.links[static_cast<std::size_t>(b)];
      const auto h = fading.b2u(l.link, m, rng);
      const auto w_bg = mrt(fading.b2g(m, rng));
      interference += p_mw * l.gain * std::norm(inner(h, w_bg));
    }
    if (signal / (interference + noise_mw) < threshold) ++outages;
  }
  return static_cast<double>(outages) / static_cast<double>(params.varsigma);
}

double eod(std::span<const double> per_slot_tops, double slot_duration_s) {
  double s = 0.0;
  for (double t : per_slot_tops) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("TOP values must lie in [0, 1]");
    s += t;
  }
  return slot_duration_s * s;
}

double inner_reward(const CsiSample& csi, std::span<const Complex> w) {
  return std::norm(inner(csi.truth, w)) / squared_norm(csi.est);
}

OuterEnv::OuterEnv(const std::vector<RbpMap>& pool, const HexLayout& layout, int tier_p,
                   int n_slots, std::uint64_t seed)
    : pool_(&pool), layout_(&layout), tier_p_(tier_p), n_slots_(n_slots),
      rng_(derive_seed(seed, "outer-env")) {
  if (pool.empty()) throw ConfigError("outer environment needs a non-empty RBP pool");
  if (n_slots < 1) throw ConfigError("outer environment needs at least one slot");
}

const RbpMap& OuterEnv::reset() {
  current_ = pool_step_index(*pool_, rng_);
  slot_ = 0;
  started_ = true;
  return state();
}

RbPartition OuterEnv::partition(int k) const { return partition_rb(state(), k, tier_p_, *layout_); }

OuterEnv::Step OuterEnv::step(int k) {
  if (!started_) throw std::logic_error("outer environment stepped before reset");
  if (done()) throw std::logic_error("outer environment stepped after the episode ended");
  Step s;
  s.partition = partition(k);
  s.reward = outer_reward(s.partition);
  current_ = pool_step_index(*pool_, rng_);
  ++slot_;
  s.done = done();
  return s;
}

std::vector<double> InnerState::features() const {
  std::vector<double> f(2 * est.size() + 1);
  for (std::size_t i = 0; i < est.size(); ++i) {
    f[2 * i] = est[i].real();
    f[2 * i + 1] = est[i].imag();
  }
  f.back() = los ? 1.0 : 0.0;
  return f;
}

InnerEnv::InnerEnv(const BuildingWorld& world, ChannelConfig cfg, std::size_t antennas,
                   std::uint64_t seed)
    : world_(&world), cfg_(cfg), antennas_(antennas), rng_(derive_seed(seed, "inner-env")) {
  cfg_.validate();
  if (antennas == 0) throw ConfigError("antenna count must be positive");
}

void InnerEnv::redraw() {
  csi_ = compose_imperfect_csi(sample_fading(link_, antennas_, cfg_, rng_), cfg_.rho, link_, rng_);
  state_.est = csi_.est;
  state_.los = link_ == LinkType::LoS;
}

std::optional<InnerState> InnerEnv::reset(std::span<const int> available, const Vec3& due) {
  if (available.empty()) return std::nullopt;
  const int b = available[rng_.index(available.size())];
  return reset_fixed(b, world_->blocked(b, due) ? LinkType::NLoS : LinkType::LoS);
}

std::optional<InnerState> InnerEnv::reset_fixed(int bs, LinkType link) {
  bs_ = bs;
  link_ = link;
  redraw();
  return state_;
}

InnerEnv::Step InnerEnv::step(std::span<const double> raw_action) {
  if (raw_action.size() != 2 * antennas_) throw DimensionError("inner action must have 2M entries");
  const auto w = beam_from_real(raw_action);
  return step_beam(w);
}

InnerEnv::Step InnerEnv::step_beam(std::span<const Complex> w) {
  if (bs_ < 0) throw std::logic_error("inner environment stepped before reset");
  Step s;
  s.reward = inner_reward(csi_, w);
  redraw();
  s.next = state_;
  return s;
}

}  // namespace uavnet
