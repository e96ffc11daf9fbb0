// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must not call inline library code: anything instantiated here could be
// selected by the linker for non-AVX2 callers.

#include <immintrin.h>

#include "llmprior/simd/kernels.hpp"

namespace llmprior::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(m + r * cols, x, cols);
}

// y += s * x over n lanes
inline void axpy(double s, const double* x, double* y, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(sv, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += s * x[i];
}

void gemv_t_avx2(const double* m, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy(v[r], m + r * cols, y, cols);
}

void weighted_gram_avx2(const double* m, std::size_t rows, std::size_t cols, const double* w, double* g) {
  for (std::size_t i = 0; i < cols * cols; ++i) g[i] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    for (std::size_t k = 0; k < cols; ++k) axpy(w[r] * row[k], row + k, g + k * cols + k, cols - k);
  }
  for (std::size_t k = 0; k < cols; ++k)
    for (std::size_t j = k + 1; j < cols; ++j) g[j * cols + k] = g[k * cols + j];
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d < 0.0 ? -d : d;
  }
  return s;
}

}  // namespace

const KernelTable avx2_table{
    Isa::avx2,        dot_avx2,         gemv_avx2,        gemv_t_avx2,
    weighted_gram_avx2, sum_sq_diff_avx2, sum_abs_diff_avx2,
};

}  // namespace llmprior::simd::detail
