#include <cassert>
#include <cstdlib>
#include <string_view>

#include "llmprior/simd/kernels.hpp"

namespace llmprior::simd {
namespace {

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(LLMPRIOR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(LLMPRIOR_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select() noexcept {
  if (const char* forced = std::getenv("LLMPRIOR_ISA")) {
    const std::string_view name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
      if (name == isa_name(isa))
        if (const KernelTable* t = kernels_for(isa)) return *t;
  }
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (const KernelTable* t = kernels_for(isa)) return *t;
  return detail::scalar_table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable* kernels_for(Isa isa) noexcept {
  if (!cpu_supports(isa)) return nullptr;
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table;
    case Isa::avx2:
#if defined(LLMPRIOR_HAVE_AVX2)
      return &detail::avx2_table;
#else
      return nullptr;
#endif
    case Isa::neon:
#if defined(LLMPRIOR_HAVE_NEON)
      return &detail::neon_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
    if (kernels_for(isa)) out.push_back(isa);
  return out;
}

const KernelTable& kernels() noexcept {
  static const KernelTable& table = select();
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return kernels().dot(a.data(), b.data(), a.size());
}

void gemv(std::span<const double> m, std::size_t cols, std::span<const double> x, std::span<double> y) {
  assert(x.size() == cols && m.size() == y.size() * cols);
  kernels().gemv(m.data(), y.size(), cols, x.data(), y.data());
}

void gemv_t(std::span<const double> m, std::size_t cols, std::span<const double> v, std::span<double> y) {
  assert(y.size() == cols && m.size() == v.size() * cols);
  kernels().gemv_t(m.data(), v.size(), cols, v.data(), y.data());
}

void weighted_gram(std::span<const double> m, std::size_t cols, std::span<const double> w, std::span<double> g) {
  assert(g.size() == cols * cols && m.size() == w.size() * cols);
  kernels().weighted_gram(m.data(), w.size(), cols, w.data(), g.data());
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return kernels().sum_sq_diff(a.data(), b.data(), a.size());
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return kernels().sum_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace llmprior::simd
