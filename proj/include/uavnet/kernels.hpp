#pragma once

// Dense double-precision kernels behind the neural-network engine.
//
// Every kernel has a portable scalar reference in kernels::scalar and, on
// x86-64, an AVX2+FMA variant in kernels::avx2. The active table is chosen
// once at startup from CPUID; UAVNET_ISA=scalar in the environment (or
// set_isa()) forces the reference path. All matrices are row-major with
// tightly packed rows.

#include <cstddef>
#include <string_view>

namespace uavnet::kernels {

enum class Isa { Scalar, Avx2 };

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // C[m x n] = A[m x k] * B[n x k]^T   (C overwritten)
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                  std::size_t k);
  // C[m x n] = A[m x k] * B[k x n]     (C overwritten)
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                  std::size_t k);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn_acc)(const double* a, const double* b, double* c, std::size_t m,
                      std::size_t n, std::size_t k);
  // Bias-corrected Adam step over n parameters.
  void (*adam)(double* param, const double* grad, double* m1, double* m2, std::size_t n,
               const AdamCoeffs& c);
  // dst = tau * src + (1 - tau) * dst
  void (*lerp)(double* dst, const double* src, double tau, std::size_t n);
};

namespace scalar {
const KernelTable& table();
}

namespace avx2 {
/// Null when the AVX2 variants were not compiled in.
const KernelTable* table();
}

bool cpu_has_avx2();

/// Currently selected table.
const KernelTable& active();

/// Force a particular ISA. Returns false (and leaves the selection unchanged)
/// if the ISA is unavailable on this build or CPU.
bool set_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace uavnet::kernels
