#pragma once

// Dense inner loops used by the GLM fits and the CV metrics.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The variant is
// chosen once at first use from CPUID; LLMPRIOR_ISA=scalar|avx2|neon in the
// environment overrides the choice. Vector variants reorder floating-point
// sums, so they agree with the scalar reference to rounding, not bit-exactly.
//
// Matrices are row-major with `cols` doubles per row.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace llmprior::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[r] = sum_c m[r, c] * x[c]
  void (*gemv)(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y[c] = sum_r m[r, c] * v[r]
  void (*gemv_t)(const double* m, std::size_t rows, std::size_t cols, const double* v, double* y);
  // g = m^T diag(w) m, written as a full symmetric cols x cols matrix
  void (*weighted_gram)(const double* m, std::size_t rows, std::size_t cols, const double* w, double* g);
  // sum_i (a[i] - b[i])^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  // sum_i |a[i] - b[i]|
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
};

std::string_view isa_name(Isa isa) noexcept;

/// Variants compiled in and supported by this CPU, scalar first.
std::vector<Isa> available_isas();

/// Table for a specific variant; nullptr when unavailable.
const KernelTable* kernels_for(Isa isa) noexcept;

/// The dispatched table used by the library.
const KernelTable& kernels() noexcept;

// Span conveniences over the dispatched table. Sizes are checked with
// assertions only; callers own shape consistency.
double dot(std::span<const double> a, std::span<const double> b);
void gemv(std::span<const double> m, std::size_t cols, std::span<const double> x, std::span<double> y);
void gemv_t(std::span<const double> m, std::size_t cols, std::span<const double> v, std::span<double> y);
void weighted_gram(std::span<const double> m, std::size_t cols, std::span<const double> w, std::span<double> g);
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
double sum_abs_diff(std::span<const double> a, std::span<const double> b);

namespace detail {
extern const KernelTable scalar_table;
#if defined(LLMPRIOR_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(LLMPRIOR_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace llmprior::simd
