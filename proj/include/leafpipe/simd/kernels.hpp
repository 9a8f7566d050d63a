#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops shared by the image filters and the CNN layers.
// Each kernel has a portable scalar reference and, where the CPU allows it, a
// vectorized variant. The active set is picked once at runtime and may be
// forced with LEAFPIPE_SIMD=scalar|avx2 or set_isa().

namespace leafpipe::simd {

enum class Isa { scalar, avx2 };

template <typename T>
struct KernelTable {
  /// sum_i x[i] * y[i]
  T (*dot)(const T* x, const T* y, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(T a, const T* x, T* y, std::size_t n);
  /// C[m,n] (+)= sum_k A[m,k] * B[k,n], all row-major with leading dimensions.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
               const T* b, std::size_t ldb, T* c, std::size_t ldc, bool accumulate);
};

namespace scalar {
template <typename T> T dot(const T* x, const T* y, std::size_t n);
template <typename T> void axpy(T a, const T* x, T* y, std::size_t n);
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
          std::size_t ldb, T* c, std::size_t ldc, bool accumulate);
}  // namespace scalar

#if defined(LEAFPIPE_HAVE_AVX2)
namespace avx2 {
template <typename T> T dot(const T* x, const T* y, std::size_t n);
template <typename T> void axpy(T a, const T* x, T* y, std::size_t n);
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
          std::size_t ldb, T* c, std::size_t ldc, bool accumulate);
}  // namespace avx2
#endif

bool isa_supported(Isa isa);
Isa active_isa();
/// Throws std::invalid_argument when the CPU lacks the requested ISA.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

template <typename T> const KernelTable<T>& kernels_for(Isa isa);
template <typename T> const KernelTable<T>& kernels() { return kernels_for<T>(active_isa()); }

template <typename T> inline T dot(const T* x, const T* y, std::size_t n) {
  return kernels<T>().dot(x, y, n);
}
template <typename T> inline void axpy(T a, const T* x, T* y, std::size_t n) {
  kernels<T>().axpy(a, x, y, n);
}
template <typename T>
inline void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                 const T* b, std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
  kernels<T>().gemm(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

}  // namespace leafpipe::simd
