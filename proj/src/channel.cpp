#include "uavnet/channel.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <stdexcept>

#include "uavnet/error.hpp"

namespace uavnet {

void ChannelConfig::validate() const {
  if (!(fc_ghz > 0.0)) throw ConfigError("carrier frequency must be positive");
  if (!(m_los >= 0.5 && m_nlos >= 0.5)) throw ConfigError("Nakagami m must be >= 0.5");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("CSI correlation rho must lie in [0, 1]");
  if (!(omega > 0.0)) throw ConfigError("fading spread omega must be positive");
}

double pathloss_db(LinkType link, double d_m, double h_m, double fc_ghz) {
  if (!(d_m > 0.0)) throw DomainError("pathloss distance must be positive");
  if (!(fc_ghz > 0.0)) throw DomainError("carrier frequency must be positive");
  if (link == LinkType::LoS) return 28.0 + 22.0 * std::log10(d_m) + 20.0 * std::log10(fc_ghz);
  if (!(h_m > 1.0)) throw DomainError("NLoS pathloss needs altitude above 1 m");
  return -17.5 + (46.0 - 7.0 * std::log10(h_m)) * std::log10(d_m) +
         20.0 * std::log10(40.0 * std::numbers::pi * fc_ghz / 3.0);
}

double prob_los(double h_m, double r_m) {
  if (!(h_m > 22.5 && h_m <= 300.0))
    throw DomainError("LoS probability model covers 22.5 m < h <= 300 m");
  if (r_m < 0.0) throw DomainError("horizontal distance must be non-negative");
  if (h_m > 100.0) return 1.0;
  const double lh = std::log10(h_m);
  const double eps1 = std::max(460.0 * lh - 700.0, 18.0);
  const double eps2 = 4300.0 * lh - 3800.0;
  const double near = r_m == 0.0 ? 1.0 : std::min(eps1 / r_m, 1.0);
  const double e = std::exp(-r_m / eps2);
  return near * (1.0 - e) + e;
}

double expected_pathloss_db(double d_m, double h_m, double fc_ghz) {
  const double r = std::sqrt(std::max(d_m * d_m - h_m * h_m, 0.0));
  const double p = prob_los(h_m, r);
  return p * pathloss_db(LinkType::LoS, d_m, h_m, fc_ghz) +
         (1.0 - p) * pathloss_db(LinkType::NLoS, d_m, h_m, fc_ghz);
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s{0.0, 0.0};
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s;
}

double norm(std::span<const Complex> v) { return std::sqrt(squared_norm(v)); }

ComplexVec sample_fading(LinkType link, std::size_t m_antennas, const ChannelConfig& cfg,
                         Rng& rng) {
  const double m = cfg.nakagami_m(link);
  ComplexVec out(m_antennas);
  for (auto& c : out) {
    const double power = rng.gamma(m, cfg.omega / m);
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    c = std::polar(std::sqrt(power), phase);
  }
  return out;
}

ComplexVec sample_rayleigh(std::size_t m_antennas, Rng& rng) {
  ComplexVec out(m_antennas);
  const double s = std::sqrt(0.5);
  for (auto& c : out) {
    const double re = s * rng.normal();
    const double im = s * rng.normal();
    c = {re, im};
  }
  return out;
}

CsiSample compose_imperfect_csi(ComplexVec est, double rho, LinkType link, Rng& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
  CsiSample s;
  s.link = link;
  s.delta = sample_rayleigh(est.size(), rng);
  if (rho == 1.0) {
    s.truth = est;
  } else {
    const double a = std::sqrt(rho);
    const double b = std::sqrt(1.0 - rho);
    s.truth.resize(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) s.truth[i] = a * est[i] + b * s.delta[i];
  }
  s.est = std::move(est);
  return s;
}

ComplexVec mrt(std::span<const Complex> v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw DomainError("MRT of a zero vector is undefined");
  ComplexVec w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::conj(v[i]) / n;
  return w;
}

}  // namespace uavnet

namespace uavnet {

ComplexVec beam_from_real(std::span<const double> raw) {
  if (raw.size() % 2 != 0 || raw.empty())
    throw std::invalid_argument("beam action needs an even, non-zero number of reals");
  ComplexVec w(raw.size() / 2);
  double n2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = {raw[2 * i], raw[2 * i + 1]};
    n2 += std::norm(w[i]);
  }
  const double n = std::sqrt(n2);
  if (!(n >= 1e-9) || !std::isfinite(n)) {
    std::fill(w.begin(), w.end(), Complex{0.0, 0.0});
    w[0] = {1.0, 0.0};
    return w;
  }
  for (auto& c : w) c /= n;
  return w;
}

}  // namespace uavnet
