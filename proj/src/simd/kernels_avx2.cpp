#include "leafpipe/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace leafpipe::simd::avx2 {
namespace {

template <typename T> struct Vec;

template <> struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t width = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg set1(float v) { return _mm256_set1_ps(v); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static float hsum(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return _mm_cvtss_f32(s);
  }
};

template <> struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t width = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static double hsum(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d h = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, h));
  }
};

// 4 x (2 * width) register tile of C, k-loop innermost.
template <typename T>
inline void micro_4x2(std::size_t k, const T* a, std::size_t lda, const T* b, std::size_t ldb,
                      T* c, std::size_t ldc, bool accumulate) {
  using V = Vec<T>;
  constexpr std::size_t W = V::width;
  typename V::reg c00 = V::zero(), c01 = V::zero(), c10 = V::zero(), c11 = V::zero();
  typename V::reg c20 = V::zero(), c21 = V::zero(), c30 = V::zero(), c31 = V::zero();
  const T* a0 = a;
  const T* a1 = a + lda;
  const T* a2 = a + 2 * lda;
  const T* a3 = a + 3 * lda;
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = b + p * ldb;
    const auto b0 = V::load(brow);
    const auto b1 = V::load(brow + W);
    auto av = V::set1(a0[p]);
    c00 = V::fmadd(av, b0, c00);
    c01 = V::fmadd(av, b1, c01);
    av = V::set1(a1[p]);
    c10 = V::fmadd(av, b0, c10);
    c11 = V::fmadd(av, b1, c11);
    av = V::set1(a2[p]);
    c20 = V::fmadd(av, b0, c20);
    c21 = V::fmadd(av, b1, c21);
    av = V::set1(a3[p]);
    c30 = V::fmadd(av, b0, c30);
    c31 = V::fmadd(av, b1, c31);
  }
  auto put = [&](T* dst, typename V::reg v) {
    V::store(dst, accumulate ? V::add(V::load(dst), v) : v);
  };
  put(c, c00);
  put(c + W, c01);
  put(c + ldc, c10);
  put(c + ldc + W, c11);
  put(c + 2 * ldc, c20);
  put(c + 2 * ldc + W, c21);
  put(c + 3 * ldc, c30);
  put(c + 3 * ldc + W, c31);
}

template <typename T>
inline void micro_1x1(std::size_t k, const T* a, const T* b, std::size_t ldb, T* c,
                      bool accumulate) {
  using V = Vec<T>;
  auto acc = V::zero();
  for (std::size_t p = 0; p < k; ++p) acc = V::fmadd(V::set1(a[p]), V::load(b + p * ldb), acc);
  V::store(c, accumulate ? V::add(V::load(c), acc) : acc);
}

template <typename T>
inline void edge_scalar(std::size_t k, const T* a, const T* b, std::size_t ldb, T* c,
                        bool accumulate) {
  T acc = 0;
  for (std::size_t p = 0; p < k; ++p) acc += a[p] * b[p * ldb];
  *c = accumulate ? *c + acc : acc;
}

}  // namespace

template <typename T> T dot(const T* x, const T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t W = V::width;
  auto s0 = V::zero(), s1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * W <= n; i += 2 * W) {
    s0 = V::fmadd(V::load(x + i), V::load(y + i), s0);
    s1 = V::fmadd(V::load(x + i + W), V::load(y + i + W), s1);
  }
  for (; i + W <= n; i += W) s0 = V::fmadd(V::load(x + i), V::load(y + i), s0);
  T acc = V::hsum(V::add(s0, s1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T> void axpy(T a, const T* x, T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t W = V::width;
  const auto av = V::set1(a);
  std::size_t i = 0;
  for (; i + W <= n; i += W) V::store(y + i, V::fmadd(av, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
          std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
  constexpr std::size_t W = Vec<T>::width;
  constexpr std::size_t NR = 2 * W;
  constexpr std::size_t MR = 4;
  // Column panels outermost keep the k x NR slice of B hot while rows of A stream.
  std::size_t j = 0;
  for (; j + NR <= n; j += NR) {
    std::size_t i = 0;
    for (; i + MR <= m; i += MR)
      micro_4x2(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc, accumulate);
    for (; i < m; ++i) {
      micro_1x1(k, a + i * lda, b + j, ldb, c + i * ldc + j, accumulate);
      micro_1x1(k, a + i * lda, b + j + W, ldb, c + i * ldc + j + W, accumulate);
    }
  }
  for (; j + W <= n; j += W)
    for (std::size_t i = 0; i < m; ++i)
      micro_1x1(k, a + i * lda, b + j, ldb, c + i * ldc + j, accumulate);
  for (; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      edge_scalar(k, a + i * lda, b + j, ldb, c + i * ldc + j, accumulate);
}

template float dot<float>(const float*, const float*, std::size_t);
template double dot<double>(const double*, const double*, std::size_t);
template void axpy<float>(float, const float*, float*, std::size_t);
template void axpy<double>(double, const double*, double*, std::size_t);
template void gemm<float>(std::size_t, std::size_t, std::size_t, const float*, std::size_t,
                          const float*, std::size_t, float*, std::size_t, bool);
template void gemm<double>(std::size_t, std::size_t, std::size_t, const double*, std::size_t,
                           const double*, std::size_t, double*, std::size_t, bool);

}  // namespace leafpipe::simd::avx2
