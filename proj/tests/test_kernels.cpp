#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "uavnet/kernels.hpp"
#include "uavnet/rng.hpp"

using namespace uavnet;
namespace k = uavnet::kernels;

namespace {

std::vector<double> randv(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Naive triple loops written out independently of either kernel table.
std::vector<double> ref_gemm_nt(const std::vector<double>& a, const std::vector<double>& b,
                                std::size_t m, std::size_t n, std::size_t kk) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < kk; ++p) c[i * n + j] += a[i * kk + p] * b[j * kk + p];
  return c;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

class Tables : public ::testing::TestWithParam<const k::KernelTable*> {};

std::vector<const k::KernelTable*> all_tables() {
  std::vector<const k::KernelTable*> t{&k::scalar::table()};
  if (k::avx2::table() && k::cpu_has_avx2()) t.push_back(k::avx2::table());
  return t;
}

constexpr std::size_t kSizes[] = {1, 3, 4, 5, 7, 8, 13, 16, 33, 130};

}  // namespace

TEST_P(Tables, DotMatchesReference) {
  Rng rng(1);
  for (auto n : kSizes) {
    const auto a = randv(n, rng), b = randv(n, rng);
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref += a[i] * b[i];
    EXPECT_NEAR(GetParam()->dot(a.data(), b.data(), n), ref, 1e-12);
  }
}

TEST_P(Tables, AxpyMatchesReference) {
  Rng rng(2);
  for (auto n : kSizes) {
    const auto x = randv(n, rng);
    auto y = randv(n, rng);
    auto ref = y;
    for (std::size_t i = 0; i < n; ++i) ref[i] += 0.37 * x[i];
    GetParam()->axpy(0.37, x.data(), y.data(), n);
    expect_close(y, ref, 1e-14);
  }
}

TEST_P(Tables, GemmVariantsMatchNaiveLoops) {
  Rng rng(3);
  for (std::size_t m : {1, 2, 5, 9})
    for (std::size_t n : {1, 3, 4, 8, 11})
      for (std::size_t kk : {1, 4, 7, 17}) {
        const auto a = randv(m * kk, rng);
        const auto b = randv(n * kk, rng);
        std::vector<double> c(m * n, 99.0);
        GetParam()->gemm_nt(a.data(), b.data(), c.data(), m, n, kk);
        expect_close(c, ref_gemm_nt(a, b, m, n, kk), 1e-12);

        // B in [k x n] layout: transpose b.
        std::vector<double> bt(kk * n);
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t p = 0; p < kk; ++p) bt[p * n + j] = b[j * kk + p];
        std::fill(c.begin(), c.end(), -5.0);
        GetParam()->gemm_nn(a.data(), bt.data(), c.data(), m, n, kk);
        expect_close(c, ref_gemm_nt(a, b, m, n, kk), 1e-12);

        // A in [k x m] layout, accumulating onto an existing C.
        std::vector<double> at(kk * m);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < kk; ++p) at[p * m + i] = a[i * kk + p];
        std::vector<double> acc(m * n, 1.5);
        GetParam()->gemm_tn_acc(at.data(), bt.data(), acc.data(), m, n, kk);
        auto ref = ref_gemm_nt(a, b, m, n, kk);
        for (auto& v : ref) v += 1.5;
        expect_close(acc, ref, 1e-12);
      }
}

TEST_P(Tables, AdamMatchesClosedForm) {
  Rng rng(4);
  for (auto n : kSizes) {
    auto p = randv(n, rng);
    const auto g = randv(n, rng);
    auto m1 = randv(n, rng), m2 = randv(n, rng);
    for (auto& v : m2) v = std::abs(v);
    const k::AdamCoeffs c{0.01, 0.9, 0.999, 1e-8, 1.0 - std::pow(0.9, 3), 1.0 - std::pow(0.999, 3)};
    auto rp = p, rm1 = m1, rm2 = m2;
    for (std::size_t i = 0; i < n; ++i) {
      rm1[i] = 0.9 * rm1[i] + 0.1 * g[i];
      rm2[i] = 0.999 * rm2[i] + 0.001 * g[i] * g[i];
      rp[i] -= 0.01 * (rm1[i] / c.bias1) / (std::sqrt(rm2[i] / c.bias2) + 1e-8);
    }
    GetParam()->adam(p.data(), g.data(), m1.data(), m2.data(), n, c);
    expect_close(p, rp, 1e-13);
    expect_close(m1, rm1, 1e-15);
    expect_close(m2, rm2, 1e-15);
  }
}

TEST_P(Tables, LerpMatchesReference) {
  Rng rng(5);
  for (auto n : kSizes) {
    const auto src = randv(n, rng);
    auto dst = randv(n, rng);
    auto ref = dst;
    for (std::size_t i = 0; i < n; ++i) ref[i] = 0.25 * src[i] + 0.75 * ref[i];
    GetParam()->lerp(dst.data(), src.data(), 0.25, n);
    expect_close(dst, ref, 1e-15);
  }
}

INSTANTIATE_TEST_SUITE_P(Isa, Tables, ::testing::ValuesIn(all_tables()),
                         [](const auto& info) { return std::string(info.param->name); });

TEST(KernelDispatch, Avx2AgreesWithScalar) {
  const auto* v = k::avx2::table();
  if (!v || !k::cpu_has_avx2()) GTEST_SKIP() << "AVX2 not available";
  const auto& s = k::scalar::table();
  Rng rng(6);
  const std::size_t m = 7, n = 37, kk = 129;
  const auto a = randv(m * kk, rng), b = randv(n * kk, rng);
  std::vector<double> cs(m * n), cv(m * n);
  s.gemm_nt(a.data(), b.data(), cs.data(), m, n, kk);
  v->gemm_nt(a.data(), b.data(), cv.data(), m, n, kk);
  expect_close(cs, cv, 1e-12);
  EXPECT_NEAR(s.dot(a.data(), b.data(), a.size()), v->dot(a.data(), b.data(), a.size()), 1e-11);
}

TEST(KernelDispatch, SetIsaSwitchesActiveTable) {
  const auto before = k::active().isa;
  ASSERT_TRUE(k::set_isa(k::Isa::Scalar));
  EXPECT_EQ(k::active().isa, k::Isa::Scalar);
  const bool avx = k::set_isa(k::Isa::Avx2);
  EXPECT_EQ(avx, k::avx2::table() != nullptr && k::cpu_has_avx2());
  if (avx) {
    EXPECT_EQ(k::active().isa, k::Isa::Avx2);
  }
  k::set_isa(before);
  EXPECT_EQ(k::isa_name(k::Isa::Scalar), "scalar");
  EXPECT_EQ(k::isa_name(k::Isa::Avx2), "avx2");
}
