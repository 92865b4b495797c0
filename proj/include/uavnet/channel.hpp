#pragma once

// Large-scale pathloss (3GPP UMa aerial), LoS probability, small-scale
// fading draws, the imperfect-CSI composition and MRT beams.

#include <complex>
#include <span>
#include <vector>

#include "uavnet/rng.hpp"

namespace uavnet {

enum class LinkType { LoS, NLoS };

using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;

struct ChannelConfig {
  double fc_ghz = 2.0;
  double m_los = 3.0;
  double m_nlos = 1.0;
  double rho = 0.75;   // CSI correlation
  double omega = 1.0;  // mean fading power per antenna

  void validate() const;
  double nakagami_m(LinkType link) const { return link == LinkType::LoS ? m_los : m_nlos; }
};

/// Pathloss in dB; d in meters, h (DUE altitude, NLoS only) in meters, fc in GHz.
double pathloss_db(LinkType link, double d_m, double h_m, double fc_ghz);

/// Probability of LoS at altitude h and horizontal distance r. 22.5 < h <= 300.
double prob_los(double h_m, double r_m);

/// Expectation over LoS/NLoS of the pathloss in dB. Reference utility only;
/// the simulator decides the link type geometrically.
double expected_pathloss_db(double d_m, double h_m, double fc_ghz);

/// Row-vector times column-vector product sum_i a_i b_i (no conjugation).
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
double squared_norm(std::span<const Complex> v);
double norm(std::span<const Complex> v);

/// M i.i.d. Nakagami-m entries (m from the link type, spread omega) with
/// uniform phase.
ComplexVec sample_fading(LinkType link, std::size_t m_antennas, const ChannelConfig& cfg, Rng& rng);

/// M i.i.d. unit-power circularly-symmetric complex Gaussian entries.
ComplexVec sample_rayleigh(std::size_t m_antennas, Rng& rng);

struct CsiSample {
  ComplexVec est;    // estimated channel
  ComplexVec truth;  // sqrt(rho) est + sqrt(1 - rho) delta
  ComplexVec delta;  // estimation error draw
  LinkType link = LinkType::NLoS;
};

CsiSample compose_imperfect_csi(ComplexVec est, double rho, LinkType link, Rng& rng);

/// conj(v) / ||v||, so that |inner(v, mrt(v))| = ||v||. Throws DomainError
/// on a zero vector.
ComplexVec mrt(std::span<const Complex> v);

}  // namespace uavnet

namespace uavnet {

/// Interleaved (re, im) reals -> unit complex vector. Raw vectors with norm
/// below 1e-9 map to the first basis vector.
ComplexVec beam_from_real(std::span<const double> raw);

}  // namespace uavnet
