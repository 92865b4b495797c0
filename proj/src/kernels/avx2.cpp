// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma;
// nothing here may run before dispatch has confirmed CPU support.
#include "uavnet/kernels.hpp"

#include <immintrin.h>

namespace uavnet::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four dot products sharing the loads of one A row.
void dot4(const double* a, const double* b0, const double* b1, const double* b2,
          const double* b3, std::size_t k, double* out) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) {
    const __m256d va = _mm256_loadu_pd(a + p);
    s0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b0 + p), s0);
    s1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b1 + p), s1);
    s2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b2 + p), s2);
    s3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b3 + p), s3);
  }
  double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
  for (; p < k; ++p) {
    r0 += a[p] * b0[p];
    r1 += a[p] * b1[p];
    r2 += a[p] * b2[p];
    r3 += a[p] * b3[p];
  }
  out[0] = r0;
  out[1] = r1;
  out[2] = r2;
  out[3] = r3;
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
      dot4(ai, b + j * k, b + (j + 1) * k, b + (j + 2) * k, b + (j + 3) * k, k, ci + j);
    for (; j < n; ++j) ci[j] = dot(ai, b + j * k, k);
  }
}

// c_row += a0*b0 + a1*b1 + a2*b2 + a3*b3, one load/store of c per 4 rows.
void axpy4(const double* coef, const double* b0, const double* b1, const double* b2,
           const double* b3, double* c, std::size_t n) {
  const __m256d v0 = _mm256_set1_pd(coef[0]), v1 = _mm256_set1_pd(coef[1]);
  const __m256d v2 = _mm256_set1_pd(coef[2]), v3 = _mm256_set1_pd(coef[3]);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_loadu_pd(c + j);
    acc = _mm256_fmadd_pd(v0, _mm256_loadu_pd(b0 + j), acc);
    acc = _mm256_fmadd_pd(v1, _mm256_loadu_pd(b1 + j), acc);
    acc = _mm256_fmadd_pd(v2, _mm256_loadu_pd(b2 + j), acc);
    acc = _mm256_fmadd_pd(v3, _mm256_loadu_pd(b3 + j), acc);
    _mm256_storeu_pd(c + j, acc);
  }
  for (; j < n; ++j) c[j] += coef[0] * b0[j] + coef[1] * b1[j] + coef[2] * b2[j] + coef[3] * b3[j];
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = a + i * k;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4)
      axpy4(ai + p, b + p * n, b + (p + 1) * n, b + (p + 2) * n, b + (p + 3) * n, ci, n);
    for (; p < k; ++p) axpy(ai[p], b + p * n, ci, n);
  }
}

void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                 std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
      const double coef[4] = {a[p * m + i], a[(p + 1) * m + i], a[(p + 2) * m + i],
                              a[(p + 3) * m + i]};
      axpy4(coef, b + p * n, b + (p + 1) * n, b + (p + 2) * n, b + (p + 3) * n, ci, n);
    }
    for (; p < k; ++p) axpy(a[p * m + i], b + p * n, ci, n);
  }
}

void adam(double* param, const double* grad, double* m1, double* m2, std::size_t n,
          const AdamCoeffs& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1), nb1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2), nb2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d bc1 = _mm256_set1_pd(c.bias1), bc2 = _mm256_set1_pd(c.bias2);
  const __m256d lr = _mm256_set1_pd(c.lr), eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mm = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m1 + i), _mm256_mul_pd(nb1, g));
    const __m256d vv = _mm256_fmadd_pd(b2, _mm256_loadu_pd(m2 + i),
                                       _mm256_mul_pd(nb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m1 + i, mm);
    _mm256_storeu_pd(m2 + i, vv);
    const __m256d mhat = _mm256_div_pd(mm, bc1);
    const __m256d vhat = _mm256_div_pd(vv, bc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  if (i < n) scalar::table().adam(param + i, grad + i, m1 + i, m2 + i, n - i, c);
}

void lerp(double* dst, const double* src, double tau, std::size_t n) {
  const __m256d t = _mm256_set1_pd(tau), nt = _mm256_set1_pd(1.0 - tau);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_mul_pd(t, _mm256_loadu_pd(src + i)),
                                            _mm256_mul_pd(nt, _mm256_loadu_pd(dst + i))));
  for (; i < n; ++i) dst[i] = tau * src[i] + (1.0 - tau) * dst[i];
}

constexpr KernelTable kTable{Isa::Avx2, "avx2", dot,  axpy, gemm_nt,
                             gemm_nn,   gemm_tn_acc, adam, lerp};

}  // namespace

const KernelTable* table() { return &kTable; }

}  // namespace uavnet::kernels::avx2
