#include "leafpipe/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace leafpipe::simd {
namespace {

bool cpu_has_avx2() {
#if defined(LEAFPIPE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("LEAFPIPE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument("instruction set not supported on this CPU: " +
                                std::string(isa_name(isa)));
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

template <typename T> const KernelTable<T>& kernels_for(Isa isa) {
  static const KernelTable<T> scalar_table{&scalar::dot<T>, &scalar::axpy<T>, &scalar::gemm<T>};
#if defined(LEAFPIPE_HAVE_AVX2)
  static const KernelTable<T> avx2_table{&avx2::dot<T>, &avx2::axpy<T>, &avx2::gemm<T>};
  if (isa == Isa::avx2) return avx2_table;
#else
  (void)isa;
#endif
  return scalar_table;
}

template const KernelTable<float>& kernels_for<float>(Isa);
template const KernelTable<double>& kernels_for<double>(Isa);

}  // namespace leafpipe::simd
