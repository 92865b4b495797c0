#pragma once

// Benchmark policies, EOD evaluation along the trajectory and parameter
// sweeps over transmit power or antenna count.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "uavnet/agents.hpp"
#include "uavnet/radioenv.hpp"
#include "uavnet/rballoc.hpp"
#include "uavnet/trainer.hpp"
#include "uavnet/world.hpp"

namespace uavnet {

enum class RbPolicy { Random, Exhaustive, D3qn };
enum class BeamKind { Random, Mrt, Ddpg };

struct PolicyKind {
  RbPolicy rb = RbPolicy::Random;
  BeamKind beam = BeamKind::Random;

  bool needs_agents() const { return rb == RbPolicy::D3qn || beam == BeamKind::Ddpg; }
  friend bool operator==(const PolicyKind&, const PolicyKind&) = default;
};

struct NamedPolicy {
  std::string name;
  PolicyKind kind;
};

/// rr-wo-bd, rr-w-bd, rr-w-mrt, er-w-bd, er-w-mrt, proposed.
const std::vector<NamedPolicy>& named_policies();
const NamedPolicy& policy_by_name(std::string_view name);

/// RB maximizing the outer reward; lowest index on ties.
int rb_exhaustive(const RbpMap& map, int p, const HexLayout& layout);

/// Beam from the actor applied to (estimated CSI, LoS flag).
class DdpgBeamPolicy final : public BeamPolicy {
 public:
  explicit DdpgBeamPolicy(const DdpgAgent& agent) : agent_(&agent) {}
  ComplexVec beam(const ComplexVec& est, LinkType link, Rng& rng) override;

 private:
  const DdpgAgent* agent_;
};

struct EvalScenario {
  const BuildingWorld* world = nullptr;
  const std::vector<RbpMap>* pool = nullptr;  // slot n observes pool[n mod size]
  Trajectory trajectory;
  RadioParams radio;
  ChannelConfig channel;
  int tier_p = 1;

  static EvalScenario from_config(const TrainConfig& cfg, const BuildingWorld& world,
                                  const std::vector<RbpMap>& pool);
};

struct EvalResult {
  std::string policy;
  std::uint64_t seed = 0;
  double eod_s = 0.0;
  std::vector<double> tops;
  std::vector<int> rbs;
};

/// Common random numbers: slot n of seed s uses the same fading stream for
/// every policy and parameter value. `agents` may be null for policies that
/// do not need it.
EvalResult evaluate_eod(const EvalScenario& sc, const NamedPolicy& policy, const Checkpoint* agents,
                        std::uint64_t seed);

enum class SweepAxis { Power, Antennas };

std::string_view axis_name(SweepAxis a);
SweepAxis axis_from_name(std::string_view name);

struct SweepRow {
  std::string policy;
  std::string axis;
  double value = 0.0;
  std::uint64_t seed = 0;
  double eod_s = 0.0;
};

/// Checkpoint for one axis value (may return null for unlearned policies).
using CheckpointFor = std::function<const Checkpoint*(double value)>;

std::vector<SweepRow> sweep(const EvalScenario& base, SweepAxis axis, const std::vector<double>& values,
                            const std::vector<NamedPolicy>& policies, const std::vector<std::uint64_t>& seeds,
                            const CheckpointFor& checkpoint_for);

constexpr const char* kSweepHeader = "policy,axis,value,seed,eod_s";
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace uavnet
