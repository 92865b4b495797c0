#include <atomic>
#include <cstdlib>
#include <string>

#include "uavnet/kernels.hpp"

namespace uavnet::kernels {

#ifndef UAVNET_HAVE_AVX2
namespace avx2 {
const KernelTable* table() { return nullptr; }
}  // namespace avx2
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("UAVNET_ISA"); env && std::string(env) == "scalar")
    return &scalar::table();
  if (avx2::table() && cpu_has_avx2()) return avx2::table();
  return &scalar::table();
}

std::atomic<const KernelTable*>& selected() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() { return *selected().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) {
  if (isa == Isa::Scalar) {
    selected().store(&scalar::table());
    return true;
  }
  if (avx2::table() && cpu_has_avx2()) {
    selected().store(avx2::table());
    return true;
  }
  return false;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Scalar ? "scalar" : "avx2"; }

}  // namespace uavnet::kernels
