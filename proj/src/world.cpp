#include "uavnet/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "uavnet/error.hpp"

namespace uavnet {

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

void Region::validate() const {
  if (!(x_lo < x_up && y_lo < y_up && z_lo < z_up))
    throw ConfigError("region bounds must satisfy lo < up on every axis");
}

bool Region::contains(const Vec3& p) const {
  return p.x >= x_lo && p.x <= x_up && p.y >= y_lo && p.y <= y_up && p.z >= z_lo &&
         p.z <= z_up;
}

Vec3 Region::center() const {
  return {(x_lo + x_up) / 2.0, (y_lo + y_up) / 2.0, (z_lo + z_up) / 2.0};
}

void ItuParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ITU alpha must lie in (0, 1)");
  if (!(beta_per_km2 >= 0.0)) throw ConfigError("ITU beta must be non-negative");
  if (!(gamma_m > 0.0)) throw ConfigError("ITU gamma must be positive");
  if (!(side_km > 0.0)) throw ConfigError("region side length must be positive");
  if (!(road_width_km >= 0.0)) throw ConfigError("road width must be non-negative");
  if (clusters_per_side < 1) throw ConfigError("clusters_per_side must be >= 1");
  if (!(height_clip_m > 0.0)) throw ConfigError("height clip must be positive");
}

std::size_t ItuParams::building_count() const {
  return static_cast<std::size_t>(std::llround(beta_per_km2 * side_km * side_km));
}

double ItuParams::footprint_side_m() const {
  if (beta_per_km2 <= 0.0) return 0.0;
  return std::sqrt(alpha / beta_per_km2) * 1000.0;
}

std::vector<double> rayleigh_heights(std::size_t count, double mean, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "building-heights"));
  const double scale = mean / std::sqrt(std::numbers::pi / 2.0);
  std::vector<double> h(count);
  for (auto& v : h) v = scale * std::sqrt(-2.0 * std::log(rng.uniform_open()));
  return h;
}

std::vector<Building> generate_buildings(const ItuParams& params, std::uint64_t seed) {
  params.validate();
  const std::size_t total = params.building_count();
  if (total == 0) return {};

  const int nc = params.clusters_per_side;
  const std::size_t n_clusters = static_cast<std::size_t>(nc) * nc;
  const double side = params.side_km * 1000.0;
  const double pitch = side / nc;
  const double road = params.road_width_km * 1000.0;
  const double usable = pitch - road;  // half a road on each cluster edge
  const double fp = params.footprint_side_m();

  const std::size_t base = total / n_clusters;
  const std::size_t extra = total % n_clusters;
  const std::size_t max_per_cluster = base + (extra ? 1 : 0);
  const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(double(max_per_cluster))));
  const double cell = usable / static_cast<double>(grid);
  if (usable <= 0.0 || cell < fp) {
    std::ostringstream os;
    os << "cannot fit " << total << " buildings of side " << fp << " m into " << n_clusters
       << " clusters (cell " << cell << " m)";
    throw ConfigError(os.str());
  }

  Rng rng(derive_seed(seed, "building-layout"));
  const auto heights = rayleigh_heights(total, params.gamma_m, seed);

  std::vector<Building> out;
  out.reserve(total);
  std::vector<std::size_t> cells(grid * grid);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const std::size_t count = base + (c < extra ? 1 : 0);
    const double cx0 = static_cast<double>(c % nc) * pitch + road / 2.0;
    const double cy0 = static_cast<double>(c / nc) * pitch + road / 2.0;
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
    std::shuffle(cells.begin(), cells.end(), rng.engine());
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t gx = cells[i] % grid;
      const std::size_t gy = cells[i] / grid;
      const double x0 = cx0 + static_cast<double>(gx) * cell + rng.uniform(0.0, cell - fp);
      const double y0 = cy0 + static_cast<double>(gy) * cell + rng.uniform(0.0, cell - fp);
      Building b;
      b.x_min = x0;
      b.x_max = x0 + fp;
      b.y_min = y0;
      b.y_max = y0 + fp;
      b.height = std::min(heights[out.size()], params.height_clip_m);
      out.push_back(b);
    }
  }
  return out;
}

int hex_distance(const HexCoord& a, const HexCoord& b) {
  const int dq = a.q - b.q;
  const int dr = a.r - b.r;
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

HexLayout::HexLayout(std::vector<BsSite> sites) : sites_(std::move(sites)) {
  for (std::size_t i = 0; i < sites_.size(); ++i)
    if (sites_[i].id != static_cast<int>(i)) throw ConfigError("BS ids must be 0..B-1 in order");
}

HexLayout HexLayout::generate(int n_tiers, double isd_m, const Region& region,
                              double antenna_height_m) {
  if (n_tiers < 0) throw ConfigError("n_tiers must be >= 0");
  if (!(isd_m > 0.0)) throw ConfigError("inter-site distance must be positive");
  region.validate();

  // Axial directions, walked counter-clockwise around each ring.
  static constexpr HexCoord kDirs[6] = {{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}};
  std::vector<HexCoord> coords{{0, 0}};
  for (int ring = 1; ring <= n_tiers; ++ring) {
    HexCoord h{kDirs[4].q * ring, kDirs[4].r * ring};
    for (const auto& d : kDirs) {
      for (int step = 0; step < ring; ++step) {
        coords.push_back(h);
        h.q += d.q;
        h.r += d.r;
      }
    }
  }

  const Vec3 c = region.center();
  std::vector<BsSite> sites;
  sites.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& h = coords[i];
    BsSite s;
    s.id = static_cast<int>(i);
    s.hex = h;
    s.position = {c.x + isd_m * (h.q + h.r / 2.0), c.y + isd_m * (std::sqrt(3.0) / 2.0) * h.r,
                  antenna_height_m};
    if (!region.contains(s.position)) {
      std::ostringstream os;
      os << "BS " << i << " at (" << s.position.x << ", " << s.position.y << ", "
         << s.position.z << ") lies outside the region";
      throw ConfigError(os.str());
    }
    sites.push_back(s);
  }
  return HexLayout(std::move(sites));
}

const BsSite& HexLayout::site(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= sites_.size())
    throw std::out_of_range("BS id out of range");
  return sites_[static_cast<std::size_t>(id)];
}

bool HexLayout::in_tier(int b, int other, int p) const {
  return hex_distance(site(b).hex, site(other).hex) <= p;
}

std::vector<int> HexLayout::tier_set(int b, int p) const {
  if (p < 1 || p > 3) throw DomainError("tier order p must lie in [1, 3]");
  const auto& center = site(b).hex;
  std::vector<int> out;
  for (const auto& s : sites_)
    if (hex_distance(center, s.hex) <= p) out.push_back(s.id);
  return out;
}

namespace {

// Liang-Barsky clip of the parametric 2D segment against a rectangle.
// Returns the parameter interval [t0, t1] inside the rectangle, if any.
std::optional<std::pair<double, double>> clip_segment(double x0, double y0, double dx,
                                                      double dy, const Building& r) {
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - r.x_min, r.x_max - x0, y0 - r.y_min, r.y_max - y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      if (t > t1) return std::nullopt;
      t0 = std::max(t0, t);
    } else {
      if (t < t0) return std::nullopt;
      t1 = std::min(t1, t);
    }
  }
  return std::make_pair(t0, t1);
}

}  // namespace

bool los_blocked(const BsSite& bs, const Vec3& due, const std::vector<Building>& buildings) {
  const Vec3& a = bs.position;
  const double dx = due.x - a.x;
  const double dy = due.y - a.y;
  const double dz = due.z - a.z;
  for (const auto& b : buildings) {
    const auto hit = clip_segment(a.x, a.y, dx, dy, b);
    if (!hit) continue;
    // Ray height is monotone in t; its lowest point over the footprint is
    // at the entry parameter when climbing, the exit parameter otherwise.
    const double t = dz >= 0.0 ? hit->first : hit->second;
    if (a.z + t * dz < b.height) return true;
  }
  return false;
}

void Trajectory::validate() const {
  if (!(velocity_mps > 0.0)) throw ConfigError("velocity must be positive");
  if (!(slot_duration_s > 0.0)) throw ConfigError("slot duration must be positive");
  if (start.z != end.z) throw ConfigError("trajectory altitude must be constant");
}

double Trajectory::travel_time_s() const { return distance(start, end) / velocity_mps; }

int Trajectory::n_slots() const {
  return std::max(1, static_cast<int>(std::lround(travel_time_s() / slot_duration_s)));
}

Vec3 Trajectory::position(int n) const {
  const int total = n_slots();
  if (n < 0 || n >= total) throw std::out_of_range("slot index out of range");
  if (total == 1) return start;
  const double f = static_cast<double>(n) / static_cast<double>(total - 1);
  return {start.x + f * (end.x - start.x), start.y + f * (end.y - start.y), start.z};
}

BuildingWorld BuildingWorld::generate(const ItuParams& itu, std::uint64_t seed, int n_tiers,
                                      double isd_m, double antenna_height_m, double z_up_m) {
  BuildingWorld w;
  w.itu = itu;
  w.seed = seed;
  w.region = Region{0.0, itu.side_km * 1000.0, 0.0, itu.side_km * 1000.0, 0.0, z_up_m};
  w.region.validate();
  w.buildings = generate_buildings(itu, seed);
  w.layout = HexLayout::generate(n_tiers, isd_m, w.region, antenna_height_m);
  return w;
}

void to_json(nlohmann::json& j, const BuildingWorld& w) {
  using nlohmann::json;
  j = json::object();
  j["region"] = {{"x_lo", w.region.x_lo}, {"x_up", w.region.x_up}, {"y_lo", w.region.y_lo},
                 {"y_up", w.region.y_up}, {"z_lo", w.region.z_lo}, {"z_up", w.region.z_up}};
  j["itu"] = {{"alpha", w.itu.alpha},
              {"beta_per_km2", w.itu.beta_per_km2},
              {"gamma_m", w.itu.gamma_m},
              {"side_km", w.itu.side_km},
              {"road_width_km", w.itu.road_width_km},
              {"clusters_per_side", w.itu.clusters_per_side},
              {"height_clip_m", w.itu.height_clip_m}};
  j["seed"] = w.seed;
  json bl = json::array();
  for (const auto& b : w.buildings) bl.push_back({b.x_min, b.x_max, b.y_min, b.y_max, b.height});
  j["buildings"] = std::move(bl);
  json bs = json::array();
  for (const auto& s : w.layout.sites())
    bs.push_back({{"id", s.id},
                  {"x", s.position.x},
                  {"y", s.position.y},
                  {"z", s.position.z},
                  {"q", s.hex.q},
                  {"r", s.hex.r}});
  j["bs"] = std::move(bs);
}

void from_json(const nlohmann::json& j, BuildingWorld& w) {
  try {
    const auto& r = j.at("region");
    w.region = Region{r.at("x_lo").get<double>(), r.at("x_up").get<double>(),
                      r.at("y_lo").get<double>(), r.at("y_up").get<double>(),
                      r.at("z_lo").get<double>(), r.at("z_up").get<double>()};
    const auto& p = j.at("itu");
    w.itu.alpha = p.at("alpha").get<double>();
    w.itu.beta_per_km2 = p.at("beta_per_km2").get<double>();
    w.itu.gamma_m = p.at("gamma_m").get<double>();
    w.itu.side_km = p.at("side_km").get<double>();
    w.itu.road_width_km = p.at("road_width_km").get<double>();
    w.itu.clusters_per_side = p.at("clusters_per_side").get<int>();
    w.itu.height_clip_m = p.at("height_clip_m").get<double>();
    w.seed = j.at("seed").get<std::uint64_t>();
    w.buildings.clear();
    for (const auto& b : j.at("buildings")) {
      if (!b.is_array() || b.size() != 5) throw ConfigError("building entry must have 5 numbers");
      w.buildings.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                             b[3].get<double>(), b[4].get<double>()});
    }
    std::vector<BsSite> sites;
    for (const auto& s : j.at("bs"))
      sites.push_back({s.at("id").get<int>(),
                       {s.at("x").get<double>(), s.at("y").get<double>(), s.at("z").get<double>()},
                       {s.at("q").get<int>(), s.at("r").get<int>()}});
    w.layout = HexLayout(std::move(sites));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed world document: ") + e.what());
  }
  w.region.validate();
}

}  // namespace uavnet
