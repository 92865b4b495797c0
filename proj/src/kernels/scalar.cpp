#include "uavnet/kernels.hpp"

#include <cmath>

namespace uavnet::kernels::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot(a + i * k, b + j * k, k);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) axpy(a[i * k + p], b + p * n, ci, n);
  }
}

void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                 std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy(a[p * m + i], b + p * n, ci, n);
  }
}

void adam(double* param, const double* grad, double* m1, double* m2, std::size_t n,
          const AdamCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m1[i] = c.beta1 * m1[i] + (1.0 - c.beta1) * g;
    m2[i] = c.beta2 * m2[i] + (1.0 - c.beta2) * g * g;
    const double mhat = m1[i] / c.bias1;
    const double vhat = m2[i] / c.bias2;
    param[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

void lerp(double* dst, const double* src, double tau, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = tau * src[i] + (1.0 - tau) * dst[i];
}

constexpr KernelTable kTable{Isa::Scalar, "scalar", dot,  axpy, gemm_nt,
                             gemm_nn,     gemm_tn_acc, adam, lerp};

}  // namespace

const KernelTable& table() { return kTable; }

}  // namespace uavnet::kernels::scalar
