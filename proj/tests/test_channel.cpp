#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "uavnet/channel.hpp"
#include "uavnet/error.hpp"

using namespace uavnet;

namespace {

double ref_prob_los(double h, double r) {
  // Constants for h = 100 m worked out by hand: 460*2-700 = 220, 4300*2-3800 = 4800.
  EXPECT_EQ(h, 100.0);
  const double e1 = 220.0, e2 = 4800.0;
  return std::min(e1 / r, 1.0) * (1.0 - std::exp(-r / e2)) + std::exp(-r / e2);
}

}  // namespace

TEST(Pathloss, LoSHandValue) {
  EXPECT_NEAR(pathloss_db(LinkType::LoS, 1000.0, 100.0, 2.0), 100.0206, 1e-3);
  EXPECT_NEAR(pathloss_db(LinkType::LoS, 1000.0, 100.0, 2.0), 100.02, 5e-3);
  EXPECT_DOUBLE_EQ(pathloss_db(LinkType::LoS, 1.0, 100.0, 1.0), 28.0);
}

TEST(Pathloss, NLoSHandValue) {
  // 20 log10(40 pi 2 / 3) = 20 log10(83.7758) = 38.4624
  EXPECT_NEAR(pathloss_db(LinkType::NLoS, 1000.0, 100.0, 2.0), -17.5 + 96.0 + 38.4624, 1e-3);
  EXPECT_NEAR(pathloss_db(LinkType::NLoS, 1000.0, 100.0, 2.0), 116.96, 5e-3);
}

TEST(Pathloss, DomainErrors) {
  EXPECT_THROW(pathloss_db(LinkType::LoS, 0.0, 100.0, 2.0), DomainError);
  EXPECT_THROW(pathloss_db(LinkType::NLoS, -1.0, 100.0, 2.0), DomainError);
  EXPECT_THROW(pathloss_db(LinkType::NLoS, 10.0, 1.0, 2.0), DomainError);
}

TEST(Pathloss, StrictlyIncreasingInDistance) {
  for (auto link : {LinkType::LoS, LinkType::NLoS}) {
    double prev = pathloss_db(link, 1.5, 100.0, 2.0);
    for (double d = 2.0; d < 5000.0; d *= 1.3) {
      const double v = pathloss_db(link, d, 100.0, 2.0);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(ProbLos, HighAltitudeIsOne) {
  for (double r : {0.0, 10.0, 1e4}) EXPECT_EQ(prob_los(150.0, r), 1.0);
  EXPECT_EQ(prob_los(100.0, 0.0), 1.0);
}

TEST(ProbLos, MatchesIndependentEvaluation) {
  const double p = prob_los(100.0, 1000.0);
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1.0);
  EXPECT_NEAR(p, ref_prob_los(100.0, 1000.0), 1e-12);
}

TEST(ProbLos, DomainErrors) {
  EXPECT_THROW(prob_los(22.5, 10.0), DomainError);
  EXPECT_THROW(prob_los(300.1, 10.0), DomainError);
}

TEST(ProbLos, NonIncreasingInDistance) {
  for (double h : {23.0, 40.0, 70.0, 100.0}) {
    double prev = prob_los(h, 0.0);
    for (double r = 1.0; r < 2e4; r *= 1.2) {
      const double v = prob_los(h, r);
      EXPECT_LE(v, prev + 1e-15);
      prev = v;
    }
  }
}

TEST(Fading, NakagamiMoments) {
  ChannelConfig cfg;
  Rng rng(11);
  const int n = 100000;
  double sp = 0.0, sp2 = 0.0, sa = 0.0, sa2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto h = sample_fading(LinkType::LoS, 1, cfg, rng);
    const double p = std::norm(h[0]);
    const double a = std::abs(h[0]);
    sp += p;
    sp2 += p * p;
    sa += a;
    sa2 += a * a;
  }
  const double mp = sp / n, ma = sa / n;
  const double sep = std::sqrt((sp2 / n - mp * mp) / n);
  const double sea = std::sqrt((sa2 / n - ma * ma) / n);
  EXPECT_NEAR(mp, 1.0, 3.0 * sep);
  const double mean_amp = std::tgamma(3.5) / (std::tgamma(3.0) * std::sqrt(3.0));
  EXPECT_NEAR(mean_amp, 0.9594, 1e-4);
  EXPECT_NEAR(ma, mean_amp, 3.0 * sea);
}

TEST(Fading, NakagamiOneIsRayleigh) {
  ChannelConfig cfg;
  Rng rng(12);
  const int n = 100000;
  double sa = 0.0, sa2 = 0.0, sre = 0.0, sre2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto h = sample_fading(LinkType::NLoS, 1, cfg, rng);
    sa += std::abs(h[0]);
    sa2 += std::norm(h[0]);
    sre += h[0].real();
    sre2 += h[0].real() * h[0].real();
  }
  // Rayleigh amplitude of unit power: mean sqrt(pi)/2, variance 1 - pi/4.
  const double ma = sa / n;
  EXPECT_NEAR(ma, std::sqrt(std::numbers::pi) / 2.0, 3.0 * std::sqrt((1.0 - std::numbers::pi / 4.0) / n));
  // Real part is N(0, 1/2).
  EXPECT_NEAR(sre / n, 0.0, 3.0 * std::sqrt(0.5 / n));
  EXPECT_NEAR(sre2 / n, 0.5, 3.0 * std::sqrt(2.0 * 0.25 / n));
}

TEST(ImperfectCsi, RhoOneIsIdentity) {
  Rng rng(1);
  const ComplexVec est{{0.3, -1.2}, {2.0, 0.5}};
  const auto s = compose_imperfect_csi(est, 1.0, LinkType::NLoS, rng);
  EXPECT_EQ(s.truth, est);
  EXPECT_EQ(s.est, est);
  EXPECT_EQ(s.link, LinkType::NLoS);
}

TEST(ImperfectCsi, RhoZeroIsDelta) {
  Rng rng(2);
  const auto s = compose_imperfect_csi({{5.0, 5.0}, {1.0, 0.0}}, 0.0, LinkType::LoS, rng);
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    EXPECT_DOUBLE_EQ(s.truth[i].real(), s.delta[i].real());
    EXPECT_DOUBLE_EQ(s.truth[i].imag(), s.delta[i].imag());
  }
}

TEST(ImperfectCsi, CorrelationMatchesRho) {
  ChannelConfig cfg;
  Rng rng(3);
  const int batches = 100, per = 1000;
  std::vector<double> corr;
  for (int b = 0; b < batches; ++b) {
    std::complex<double> cross{0.0, 0.0};
    double pt = 0.0, pe = 0.0;
    for (int i = 0; i < per; ++i) {
      const auto est = sample_fading(LinkType::NLoS, 1, cfg, rng);
      const auto s = compose_imperfect_csi(est, 0.75, LinkType::NLoS, rng);
      cross += s.truth[0] * std::conj(s.est[0]);
      pt += std::norm(s.truth[0]);
      pe += std::norm(s.est[0]);
    }
    corr.push_back(cross.real() / std::sqrt(pt * pe));
  }
  double m = 0.0, m2 = 0.0;
  for (double c : corr) m += c, m2 += c * c;
  m /= batches;
  const double se = std::sqrt((m2 / batches - m * m) / batches);
  EXPECT_NEAR(m, std::sqrt(0.75), 3.0 * se);
}

TEST(ImperfectCsi, BadRhoIsDomainError) {
  Rng rng(1);
  EXPECT_THROW(compose_imperfect_csi({{1.0, 0.0}}, 1.5, LinkType::LoS, rng), DomainError);
}

TEST(Mrt, BasisVector) {
  const ComplexVec e1{{1.0, 0.0}, {0.0, 0.0}};
  const auto w = mrt(e1);
  EXPECT_EQ(w[0], std::conj(e1[0]));
  EXPECT_EQ(w[1], Complex(0.0, 0.0));
  EXPECT_DOUBLE_EQ(std::abs(inner(e1, w)), 1.0);
}

TEST(Mrt, AttainsNormAndIsOptimal) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto v = sample_rayleigh(4, rng);
    const auto w = mrt(v);
    EXPECT_NEAR(norm(w), 1.0, 1e-12);
    const double best = std::norm(inner(v, w));
    EXPECT_NEAR(best, squared_norm(v), 1e-12);
    for (int i = 0; i < 1000 / 50; ++i) {
      auto u = sample_rayleigh(4, rng);
      const double n = norm(u);
      for (auto& c : u) c /= n;
      EXPECT_LE(std::norm(inner(v, u)), best + 1e-12);
    }
  }
}

TEST(Mrt, ThousandRandomBeamsNeverBeatMrt) {
  Rng rng(8);
  const auto v = sample_rayleigh(8, rng);
  const double best = std::norm(inner(v, mrt(v)));
  for (int i = 0; i < 1000; ++i) {
    auto u = sample_rayleigh(8, rng);
    const double n = norm(u);
    for (auto& c : u) c /= n;
    EXPECT_LE(std::norm(inner(v, u)), best + 1e-12);
  }
}

TEST(Mrt, ZeroVectorIsDomainError) {
  EXPECT_THROW(mrt(ComplexVec(3)), DomainError);
}

TEST(BeamFromReal, NormalizesAndFallsBack) {
  const std::vector<double> raw{3.0, 0.0, 0.0, 4.0};
  const auto w = beam_from_real(raw);
  EXPECT_NEAR(w[0].real(), 0.6, 1e-15);
  EXPECT_NEAR(w[1].imag(), 0.8, 1e-15);
  const auto z = beam_from_real(std::vector<double>(4, 0.0));
  EXPECT_EQ(z[0], Complex(1.0, 0.0));
  EXPECT_EQ(z[1], Complex(0.0, 0.0));
  EXPECT_THROW(beam_from_real(std::vector<double>(3, 1.0)), std::invalid_argument);
}
