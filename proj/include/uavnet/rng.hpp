#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace uavnet {

/// splitmix64 finalizer; used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for the named sub-stream `tag` of `seed` (optionally indexed).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                    std::uint64_t index = 0) {
  return mix64(mix64(seed ^ hash_tag(tag)) + index);
}

/// Seeded random stream. Every stochastic component takes one of these by
/// reference; nothing in the library owns global random state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }
  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace uavnet
