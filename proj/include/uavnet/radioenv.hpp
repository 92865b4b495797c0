#pragma once

// Down-link SINR at the DUE, outage indicators and the Monte-Carlo TOP / EOD
// estimators, plus the outer (RB choice) and inner (beam choice) MDP
// environments driven by the trainer.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "uavnet/channel.hpp"
#include "uavnet/rballoc.hpp"
#include "uavnet/world.hpp"

namespace uavnet {

struct RadioParams {
  double p_dbm = 15.0;
  double sigma2_dbm = -90.0;
  double gamma_th_db = 0.0;
  int varsigma = 1000;  // SINR measurements per slot
  int antennas = 8;

  void validate() const;
};

/// Milliwatts; used for both transmit and noise power so units cancel.
double dbm_to_mw(double dbm);
double db_to_linear(double db);

struct BsLink {
  LinkType link = LinkType::NLoS;
  double distance_m = 0.0;
  double pathloss_db = 0.0;
  double gain = 0.0;  // 10^(-PL/10)
};

/// Large-scale state of every BS towards the DUE in one slot.
struct SlotContext {
  int slot = 0;
  Vec3 due;
  std::vector<BsLink> links;
};

SlotContext make_slot_context(const BuildingWorld& world, const Vec3& due, int slot,
                              const ChannelConfig& cfg);

/// One BS contribution to the SINR: large-scale gain, channel row and beam.
struct LinkDraw {
  double gain = 0.0;
  ComplexVec h;
  ComplexVec w;
};

/// Sum of serving powers over interference plus noise. Every beam must have
/// unit norm (within 1e-9), otherwise std::invalid_argument.
double sinr(std::span<const LinkDraw> serving, std::span<const LinkDraw> interfering,
            double p_mw, double noise_mw);

/// 1 when sinr is strictly below the threshold.
int itop(double sinr_linear, double gamma_th_db);

/// Small-scale fading source for the B2U and B2G channels.
class FadingModel {
 public:
  virtual ~FadingModel() = default;
  virtual ComplexVec b2u(LinkType link, std::size_t m, Rng& rng) const = 0;
  virtual ComplexVec b2g(std::size_t m, Rng& rng) const = 0;
};

/// Nakagami-m B2U fading and Rayleigh B2G fading.
class NakagamiFading final : public FadingModel {
 public:
  explicit NakagamiFading(ChannelConfig cfg) : cfg_(cfg) {}
  ComplexVec b2u(LinkType link, std::size_t m, Rng& rng) const override {
    return sample_fading(link, m, cfg_, rng);
  }
  ComplexVec b2g(std::size_t m, Rng& rng) const override { return sample_rayleigh(m, rng); }

 private:
  ChannelConfig cfg_;
};

/// Beam chosen by a serving BS from its estimated CSI.
class BeamPolicy {
 public:
  virtual ~BeamPolicy() = default;
  virtual ComplexVec beam(const ComplexVec& est, LinkType link, Rng& rng) = 0;
};

class MrtBeamPolicy final : public BeamPolicy {
 public:
  ComplexVec beam(const ComplexVec& est, LinkType, Rng&) override { return mrt(est); }
};

/// Isotropic random unit beam (normalized complex Gaussian).
class RandomBeamPolicy final : public BeamPolicy {
 public:
  ComplexVec beam(const ComplexVec& est, LinkType, Rng& rng) override;
};

/// Arithmetic TOP over params.varsigma realizations. Each realization draws
/// fresh fading for every serving and interfering BS, composes imperfect CSI
/// for the serving ones, asks `policy` for their beams and gives interferers
/// MRT beams over fresh B2G channels.
double estimate_top(const SlotContext& ctx, const RbPartition& part, BeamPolicy& policy,
                    const RadioParams& params, double rho, const FadingModel& fading, Rng& rng);

/// delta_u * sum of per-slot TOPs, in seconds.
double eod(std::span<const double> per_slot_tops, double slot_duration_s);

/// |truth . w|^2 / ||est||^2.
double inner_reward(const CsiSample& csi, std::span<const Complex> w);

/// Outer MDP: the RBP map is the state, an RB index the action.
class OuterEnv {
 public:
  OuterEnv(const std::vector<RbpMap>& pool, const HexLayout& layout, int tier_p, int n_slots,
           std::uint64_t seed);

  struct Step {
    double reward = 0.0;
    RbPartition partition;  // of the map the action was taken on
    bool done = false;
  };

  const RbpMap& reset();
  /// Reward on the current map, then transition to a fresh pool draw.
  Step step(int k);

  const RbpMap& state() const { return (*pool_)[current_]; }
  std::size_t state_index() const { return current_; }
  int slot() const { return slot_; }
  bool done() const { return slot_ >= n_slots_; }
  RbPartition partition(int k) const;

 private:
  const std::vector<RbpMap>* pool_;
  const HexLayout* layout_;
  int tier_p_;
  int n_slots_;
  Rng rng_;
  std::size_t current_ = 0;
  int slot_ = 0;
  bool started_ = false;
};

/// Estimated CSI of the selected BS plus its LoS flag.
struct InnerState {
  ComplexVec est;
  bool los = false;

  /// [re_0, im_0, ..., re_{M-1}, im_{M-1}, los] -- dimension 2M + 1.
  std::vector<double> features() const;
};

/// Inner MDP: one randomly chosen available BS, i.i.d. fading redraws.
class InnerEnv {
 public:
  InnerEnv(const BuildingWorld& world, ChannelConfig cfg, std::size_t antennas,
           std::uint64_t seed);

  struct Step {
    double reward = 0.0;
    InnerState next;
  };

  /// Picks a BS uniformly from `available` and fixes its link type at `due`.
  /// Returns nullopt when `available` is empty (the caller skips the inner loop).
  std::optional<InnerState> reset(std::span<const int> available, const Vec3& due);
  std::optional<InnerState> reset_fixed(int bs, LinkType link);

  Step step(std::span<const double> raw_action);
  Step step_beam(std::span<const Complex> w);

  const InnerState& state() const { return state_; }
  const CsiSample& csi() const { return csi_; }
  int bs() const { return bs_; }
  LinkType link() const { return link_; }
  std::size_t antennas() const { return antennas_; }

 private:
  void redraw();

  const BuildingWorld* world_;
  ChannelConfig cfg_;
  std::size_t antennas_;
  Rng rng_;
  int bs_ = -1;
  LinkType link_ = LinkType::NLoS;
  CsiSample csi_;
  InnerState state_;
};

}  // namespace uavnet
