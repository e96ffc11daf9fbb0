// Scalar reference kernels. These define the semantics the vector variants
// are tested against.

#include <cmath>

#include "llmprior/simd/kernels.hpp"

namespace llmprior::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, x, cols);
}

void gemv_t_scalar(const double* m, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    const double vr = v[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += vr * row[c];
  }
}

void weighted_gram_scalar(const double* m, std::size_t rows, std::size_t cols, const double* w, double* g) {
  for (std::size_t i = 0; i < cols * cols; ++i) g[i] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    for (std::size_t k = 0; k < cols; ++k) {
      const double s = w[r] * row[k];
      double* gk = g + k * cols;
      for (std::size_t j = k; j < cols; ++j) gk[j] += s * row[j];
    }
  }
  for (std::size_t k = 0; k < cols; ++k)
    for (std::size_t j = k + 1; j < cols; ++j) g[j * cols + k] = g[k * cols + j];
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

}  // namespace

const KernelTable scalar_table{
    Isa::scalar,        dot_scalar,         gemv_scalar,        gemv_t_scalar,
    weighted_gram_scalar, sum_sq_diff_scalar, sum_abs_diff_scalar,
};

}  // namespace llmprior::simd::detail
