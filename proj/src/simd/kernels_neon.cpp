// NEON (aarch64) kernels. Advanced SIMD is baseline on aarch64, so no extra
// compile flags are needed.

#include <arm_neon.h>

#include "llmprior/simd/kernels.hpp"

namespace llmprior::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_neon(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(m + r * cols, x, cols);
}

inline void axpy(double s, const double* x, double* y, std::size_t n) {
  const float64x2_t sv = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), sv, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += s * x[i];
}

void gemv_t_neon(const double* m, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy(v[r], m + r * cols, y, cols);
}

void weighted_gram_neon(const double* m, std::size_t rows, std::size_t cols, const double* w, double* g) {
  for (std::size_t i = 0; i < cols * cols; ++i) g[i] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    for (std::size_t k = 0; k < cols; ++k) axpy(w[r] * row[k], row + k, g + k * cols + k, cols - k);
  }
  for (std::size_t k = 0; k < cols; ++k)
    for (std::size_t j = k + 1; j < cols; ++j) g[j * cols + k] = g[k * cols + j];
}

double sum_sq_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_abs_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d < 0.0 ? -d : d;
  }
  return s;
}

}  // namespace

const KernelTable neon_table{
    Isa::neon,        dot_neon,         gemv_neon,        gemv_t_neon,
    weighted_gram_neon, sum_sq_diff_neon, sum_abs_diff_neon,
};

}  // namespace llmprior::simd::detail
