#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "uavnet/error.hpp"
#include "uavnet/world.hpp"

using namespace uavnet;

namespace {

Region default_region() { return Region{}; }

HexLayout three_tier_layout() { return HexLayout::generate(3, 450.0, default_region()); }

// Brute-force axial distance by breadth-first search over the six neighbors.
int bfs_hex_distance(HexCoord a, HexCoord b) {
  static const int dq[6] = {1, 1, 0, -1, -1, 0};
  static const int dr[6] = {0, -1, -1, 0, 1, 1};
  std::set<std::pair<int, int>> seen{{a.q, a.r}};
  std::vector<HexCoord> frontier{a};
  for (int d = 0; d < 20; ++d) {
    std::vector<HexCoord> next;
    for (auto h : frontier) {
      if (h == b) return d;
      for (int i = 0; i < 6; ++i) {
        HexCoord n{h.q + dq[i], h.r + dr[i]};
        if (seen.insert({n.q, n.r}).second) next.push_back(n);
      }
    }
    frontier = std::move(next);
  }
  return -1;
}

bool sampled_blocked(const BsSite& bs, const Vec3& due, const std::vector<Building>& all) {
  const double lo_x = std::min(bs.position.x, due.x), hi_x = std::max(bs.position.x, due.x);
  const double lo_y = std::min(bs.position.y, due.y), hi_y = std::max(bs.position.y, due.y);
  std::vector<Building> buildings;
  for (const auto& b : all)
    if (b.x_max >= lo_x && b.x_min <= hi_x && b.y_max >= lo_y && b.y_min <= hi_y) buildings.push_back(b);
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    const double x = bs.position.x + t * (due.x - bs.position.x);
    const double y = bs.position.y + t * (due.y - bs.position.y);
    const double z = bs.position.z + t * (due.z - bs.position.z);
    for (const auto& b : buildings)
      if (x >= b.x_min && x <= b.x_max && y >= b.y_min && y <= b.y_max && z < b.height) return true;
  }
  return false;
}

}  // namespace

TEST(Region, ValidatesBounds) {
  EXPECT_NO_THROW(default_region().validate());
  Region r;
  r.x_up = r.x_lo;
  EXPECT_THROW(r.validate(), ConfigError);
}

TEST(Buildings, DefaultCountAndFootprint) {
  const ItuParams p;
  const auto b = generate_buildings(p, 7);
  ASSERT_EQ(b.size(), 927u);
  double area = 0.0;
  for (const auto& x : b) area += x.footprint_area();
  EXPECT_NEAR(area / b.size() / 1e6, 0.0029, 0.0001);
}

TEST(Buildings, ZeroDensityGivesEmptyField) {
  ItuParams p;
  p.beta_per_km2 = 0.0;
  EXPECT_TRUE(generate_buildings(p, 1).empty());
}

TEST(Buildings, BuiltUpRatioNearAlpha) {
  const ItuParams p;
  const auto b = generate_buildings(p, 3);
  double area = 0.0;
  for (const auto& x : b) area += x.footprint_area();
  const double ratio = area / (p.side_km * p.side_km * 1e6);
  EXPECT_GE(ratio, 0.9 * p.alpha);
  EXPECT_LE(ratio, 1.1 * p.alpha);
}

TEST(Buildings, HeightsPositiveAndClipped) {
  const ItuParams p;
  for (const auto& x : generate_buildings(p, 11)) {
    EXPECT_GT(x.height, 0.0);
    EXPECT_LE(x.height, p.height_clip_m);
    EXPECT_LT(x.x_min, x.x_max);
    EXPECT_LT(x.y_min, x.y_max);
  }
}

TEST(Buildings, UnclippedHeightMeanMatchesRayleighMean) {
  const auto h = rayleigh_heights(927, 20.0, 5);
  const double mean = std::accumulate(h.begin(), h.end(), 0.0) / h.size();
  // Rayleigh variance (4 - pi)/2 sigma^2 with sigma = mean / sqrt(pi/2).
  const double sigma = 20.0 / std::sqrt(M_PI / 2.0);
  const double se = std::sqrt((4.0 - M_PI) / 2.0 * sigma * sigma / h.size());
  EXPECT_NEAR(mean, 20.0, 3.0 * se);
}

TEST(Buildings, NeverOnRoads) {
  const ItuParams p;
  const double pitch = p.side_km * 1000.0 / p.clusters_per_side;
  const double road = p.road_width_km * 1000.0;
  for (const auto& b : generate_buildings(p, 2)) {
    for (double v : {b.x_min, b.x_max, b.y_min, b.y_max}) {
      const double off = std::fmod(v, pitch);
      // A cluster occupies [road/2, pitch - road/2] of each pitch cell.
      EXPECT_GE(off + 1e-9, road / 2.0 - 1e-9) << v;
      EXPECT_LE(off, pitch - road / 2.0 + 1e-9) << v;
    }
  }
}

TEST(Buildings, DeterministicPerSeed) {
  const ItuParams p;
  EXPECT_EQ(generate_buildings(p, 42), generate_buildings(p, 42));
  EXPECT_NE(generate_buildings(p, 42), generate_buildings(p, 43));
}

TEST(Buildings, OvercrowdedClusterIsConfigError) {
  ItuParams p;
  p.alpha = 0.9;
  p.road_width_km = 0.3;
  EXPECT_THROW(generate_buildings(p, 1), ConfigError);
}

TEST(HexLayout, ThreeTierLayoutHas37Sites) { EXPECT_EQ(three_tier_layout().size(), 37u); }

TEST(HexLayout, SiteCountFormula) {
  for (int n = 0; n <= 3; ++n)
    EXPECT_EQ(HexLayout::generate(n, 450.0, default_region()).size(), static_cast<std::size_t>(3 * n * n + 3 * n + 1));
}

TEST(HexLayout, ZeroTiersIsCenter) {
  const auto l = HexLayout::generate(0, 450.0, default_region());
  ASSERT_EQ(l.size(), 1u);
  EXPECT_DOUBLE_EQ(l.site(0).position.x, 1500.0);
  EXPECT_DOUBLE_EQ(l.site(0).position.y, 1500.0);
  EXPECT_DOUBLE_EQ(l.site(0).position.z, 25.0);
}

TEST(HexLayout, FirstRingAtInterSiteDistance) {
  const auto l = HexLayout::generate(1, 450.0, default_region());
  ASSERT_EQ(l.size(), 7u);
  for (int i = 1; i < 7; ++i) EXPECT_NEAR(distance(l.site(i).position, l.site(0).position), 450.0, 1e-9);
}

TEST(HexLayout, NeighborsAreIsdApart) {
  const auto l = three_tier_layout();
  for (const auto& a : l.sites())
    for (const auto& b : l.sites())
      if (hex_distance(a.hex, b.hex) == 1) {
        EXPECT_NEAR(distance(a.position, b.position), 450.0, 1e-9);
      }
}

TEST(HexLayout, SitesOutsideRegionAreConfigError) {
  EXPECT_THROW(HexLayout::generate(3, 1000.0, default_region()), ConfigError);
}

TEST(HexLayout, RingOrderIds) {
  const auto l = three_tier_layout();
  int prev = 0;
  for (const auto& s : l.sites()) {
    const int ring = hex_distance(s.hex, {0, 0});
    EXPECT_GE(ring, prev);
    prev = ring;
  }
}

TEST(TierSet, CenterCardinalities) {
  const auto l = three_tier_layout();
  EXPECT_EQ(l.tier_set(0, 1).size(), 7u);
  EXPECT_EQ(l.tier_set(0, 2).size(), 19u);
  EXPECT_EQ(l.tier_set(0, 3).size(), 37u);
}

TEST(TierSet, OuterCornerHasFourInFirstTier) {
  const auto l = three_tier_layout();
  int corners = 0;
  for (const auto& s : l.sites()) {
    const auto& h = s.hex;
    const bool corner = hex_distance(h, {0, 0}) == 3 &&
                        (h.q == 0 || h.r == 0 || h.q + h.r == 0);
    if (!corner) continue;
    ++corners;
    std::size_t brute = 0;
    for (const auto& o : l.sites()) brute += bfs_hex_distance(h, o.hex) <= 1;
    EXPECT_EQ(brute, 4u);
    EXPECT_EQ(l.tier_set(s.id, 1).size(), 4u);
  }
  EXPECT_EQ(corners, 6);
}

TEST(TierSet, MatchesBruteForceDistance) {
  const auto l = three_tier_layout();
  for (int p = 1; p <= 3; ++p)
    for (const auto& s : l.sites()) {
      std::vector<int> brute;
      for (const auto& o : l.sites())
        if (bfs_hex_distance(s.hex, o.hex) <= p) brute.push_back(o.id);
      EXPECT_EQ(l.tier_set(s.id, p), brute);
    }
}

TEST(TierSet, NestedAndReflexive) {
  const auto l = three_tier_layout();
  for (const auto& s : l.sites()) {
    for (int p = 1; p <= 3; ++p) {
      const auto t = l.tier_set(s.id, p);
      EXPECT_TRUE(std::binary_search(t.begin(), t.end(), s.id));
      if (p < 3) {
        const auto t2 = l.tier_set(s.id, p + 1);
        EXPECT_TRUE(std::includes(t2.begin(), t2.end(), t.begin(), t.end()));
      }
      if (hex_distance(s.hex, {0, 0}) + p <= 3) {
        EXPECT_EQ(t.size(), static_cast<std::size_t>(3 * p * p + 3 * p + 1));
      }
    }
  }
}

TEST(TierSet, OrderOutOfRange) {
  const auto l = three_tier_layout();
  EXPECT_THROW(l.tier_set(0, 0), DomainError);
  EXPECT_THROW(l.tier_set(0, 4), DomainError);
}

TEST(LosBlocked, EmptyFieldNeverBlocks) {
  BsSite bs{0, {0, 0, 25}, {}};
  EXPECT_FALSE(los_blocked(bs, {1000, 500, 100}, {}));
}

TEST(LosBlocked, RayBelowRoofAtEntryEdge) {
  BsSite bs{0, {0, 0, 25}, {}};
  const std::vector<Building> b{{400, 600, -10, 10, 70}};
  // Ray height at x = 400 is 25 + 0.4 * 75 = 55 m.
  EXPECT_TRUE(los_blocked(bs, {1000, 0, 100}, b));
  const std::vector<Building> low{{400, 600, -10, 10, 54}};
  EXPECT_FALSE(los_blocked(bs, {1000, 0, 100}, low));
}

TEST(LosBlocked, VerticalRayMissesPrisms) {
  BsSite bs{0, {100, 100, 25}, {}};
  const std::vector<Building> b{{200, 300, 200, 300, 70}};
  EXPECT_FALSE(los_blocked(bs, {100, 100, 100}, b));
}

TEST(LosBlocked, AgreesWithSampledRayOracle) {
  const ItuParams p;
  const auto buildings = generate_buildings(p, 9);
  Rng rng(123);
  int disagreements = 0;
  int blocked = 0;
  for (int i = 0; i < 10000; ++i) {
    BsSite bs{0, {rng.uniform(0, 3000), rng.uniform(0, 3000), 25.0}, {}};
    Vec3 due{rng.uniform(0, 3000), rng.uniform(0, 3000), rng.uniform(30, 100)};
    // Short segments keep the brute-force oracle's 1000 samples dense enough.
    due.x = bs.position.x + (due.x - bs.position.x) * 0.2;
    due.y = bs.position.y + (due.y - bs.position.y) * 0.2;
    const bool a = los_blocked(bs, due, buildings);
    const bool o = sampled_blocked(bs, due, buildings);
    blocked += a;
    disagreements += a != o;
  }
  EXPECT_GT(blocked, 100);
  // Sampled oracle can only miss grazing hits between its samples.
  EXPECT_LE(disagreements, 10);
}

TEST(Trajectory, DefaultEndpointsAndSlots) {
  const Trajectory t;
  EXPECT_EQ(t.n_slots(), 22);
  EXPECT_EQ(t.position(0), (Vec3{1000, 1000, 100}));
  const auto end = t.position(21);
  EXPECT_NEAR(end.x, 2000.0, 1e-9);
  EXPECT_NEAR(end.y, 2000.0, 1e-9);
  EXPECT_DOUBLE_EQ(end.z, 100.0);
}

TEST(Trajectory, SymmetricAboutMidpoint) {
  const Trajectory t;
  const auto a = t.position(10);
  const auto b = t.position(11);
  EXPECT_NEAR((a.x + b.x) / 2.0, 1500.0, 1e-9);
  EXPECT_NEAR((a.y + b.y) / 2.0, 1500.0, 1e-9);
  EXPECT_DOUBLE_EQ(a.z, 100.0);
}

TEST(Trajectory, SlotOutOfRange) {
  const Trajectory t;
  EXPECT_THROW(t.position(-1), std::out_of_range);
  EXPECT_THROW(t.position(22), std::out_of_range);
}

TEST(BuildingWorld, JsonRoundTripIsLossless) {
  const auto w = BuildingWorld::generate(ItuParams{}, 4, 3, 450.0, 25.0, 100.0);
  const nlohmann::json j = w;
  const auto back = nlohmann::json::parse(j.dump()).get<BuildingWorld>();
  EXPECT_EQ(back.buildings, w.buildings);
  EXPECT_EQ(back.layout.sites(), w.layout.sites());
  EXPECT_EQ(back.region, w.region);
  EXPECT_EQ(back.itu, w.itu);
  EXPECT_EQ(back.seed, w.seed);
}

TEST(BuildingWorld, MalformedJsonIsConfigError) {
  EXPECT_THROW(nlohmann::json::parse(R"({"region": {}})").get<BuildingWorld>(), ConfigError);
}
