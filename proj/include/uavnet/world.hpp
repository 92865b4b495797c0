#pragma once

// Urban scenario geometry: one fixed realization of the ITU building field,
// a hexagonal BS layout, hex-ring tier sets, geometric LoS blockage and the
// straight-line DUE trajectory.

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "uavnet/rng.hpp"

namespace uavnet {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);

/// Axis-aligned simulation volume in meters.
struct Region {
  double x_lo = 0.0, x_up = 3000.0;
  double y_lo = 0.0, y_up = 3000.0;
  double z_lo = 0.0, z_up = 100.0;

  void validate() const;
  bool contains(const Vec3& p) const;
  Vec3 center() const;

  friend bool operator==(const Region&, const Region&) = default;
};

/// Rectangular-prism building standing on the ground.
struct Building {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double height = 0.0;

  double footprint_area() const { return (x_max - x_min) * (y_max - y_min); }

  friend bool operator==(const Building&, const Building&) = default;
};

/// Parameters of the ITU statistical building model. alpha: built-up land
/// ratio; beta: buildings per km^2; gamma_m: Rayleigh mean height.
struct ItuParams {
  double alpha = 0.3;
  double beta_per_km2 = 103.0;
  double gamma_m = 20.0;
  double side_km = 3.0;
  double road_width_km = 0.02;
  int clusters_per_side = 5;
  double height_clip_m = 70.0;

  void validate() const;
  std::size_t building_count() const;
  /// Side of the square footprint in meters: sqrt(alpha / beta).
  double footprint_side_m() const;

  friend bool operator==(const ItuParams&, const ItuParams&) = default;
};

/// Rayleigh draws with mean `mean` (scale mean / sqrt(pi/2)), no clipping.
std::vector<double> rayleigh_heights(std::size_t count, double mean, std::uint64_t seed);

/// One building realization over [0, D] x [0, D] meters. Deterministic in
/// (params, seed). Throws ConfigError when clusters are too small to hold
/// their share of buildings.
std::vector<Building> generate_buildings(const ItuParams& params, std::uint64_t seed);

struct HexCoord {
  int q = 0;
  int r = 0;

  friend bool operator==(const HexCoord&, const HexCoord&) = default;
};

int hex_distance(const HexCoord& a, const HexCoord& b);

struct BsSite {
  int id = 0;
  Vec3 position;
  HexCoord hex;

  friend bool operator==(const BsSite&, const BsSite&) = default;
};

/// Hexagonal BS layout: ring 0 is the center, ids assigned ring by ring.
class HexLayout {
 public:
  HexLayout() = default;
  explicit HexLayout(std::vector<BsSite> sites);

  static HexLayout generate(int n_tiers, double isd_m, const Region& region,
                            double antenna_height_m = 25.0);

  std::size_t size() const { return sites_.size(); }
  const std::vector<BsSite>& sites() const { return sites_; }
  const BsSite& site(int id) const;

  /// BS ids within hex distance p of b (b included), ascending. 1 <= p <= 3.
  std::vector<int> tier_set(int b, int p) const;
  /// Membership test matching tier_set(b, p).
  bool in_tier(int b, int other, int p) const;

 private:
  std::vector<BsSite> sites_;
};

/// Geometric blockage of the straight segment from the BS antenna to the DUE.
/// Requires due.z > bs.position.z.
bool los_blocked(const BsSite& bs, const Vec3& due, const std::vector<Building>& buildings);

/// Straight-line flight at constant altitude, sampled once per time slot.
struct Trajectory {
  Vec3 start{1000.0, 1000.0, 100.0};
  Vec3 end{2000.0, 2000.0, 100.0};
  double velocity_mps = 35.0;
  double slot_duration_s = 1.82;

  void validate() const;
  double travel_time_s() const;
  /// round(travel_time / slot_duration), at least 1.
  int n_slots() const;
  /// start + n/(N-1) (end - start); both endpoints are visited.
  Vec3 position(int n) const;
};

/// Immutable scenario geometry shared by the environments.
struct BuildingWorld {
  Region region;
  ItuParams itu;
  std::uint64_t seed = 0;
  std::vector<Building> buildings;
  HexLayout layout;

  static BuildingWorld generate(const ItuParams& itu, std::uint64_t seed, int n_tiers,
                                double isd_m, double antenna_height_m, double z_up_m);

  bool blocked(int bs, const Vec3& due) const {
    return los_blocked(layout.site(bs), due, buildings);
  }
};

void to_json(nlohmann::json& j, const BuildingWorld& w);
void from_json(const nlohmann::json& j, BuildingWorld& w);

}  // namespace uavnet
