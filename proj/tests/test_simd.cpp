#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "llmprior/simd/kernels.hpp"

using namespace llmprior::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

double tol(double scale) { return 1e-12 * std::max(1.0, scale); }

}  // namespace

TEST(Simd, ScalarTableAlwaysAvailable) {
  const auto isas = available_isas();
  ASSERT_FALSE(isas.empty());
  EXPECT_EQ(isas.front(), Isa::scalar);
  EXPECT_NE(kernels_for(Isa::scalar), nullptr);
  EXPECT_NE(kernels_for(kernels().isa), nullptr);
}

// Every available table against the scalar reference, over sizes that hit
// the vector body, the unrolled tail and the scalar remainder.
TEST(Simd, VariantsMatchScalarReference) {
  const KernelTable& ref = *kernels_for(Isa::scalar);
  std::mt19937_64 rng(7);
  for (Isa isa : available_isas()) {
    const KernelTable& k = *kernels_for(isa);
    SCOPED_TRACE(std::string(isa_name(isa)));
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 33u, 100u, 1031u}) {
      const auto a = random_vec(n, rng), b = random_vec(n, rng);
      double scale = 0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]) + a[i] * a[i] + b[i] * b[i];
      EXPECT_NEAR(k.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), tol(scale));
      EXPECT_NEAR(k.sum_sq_diff(a.data(), b.data(), n), ref.sum_sq_diff(a.data(), b.data(), n), tol(scale));
      EXPECT_NEAR(k.sum_abs_diff(a.data(), b.data(), n), ref.sum_abs_diff(a.data(), b.data(), n), tol(scale));
    }
    for (std::size_t rows : {1u, 2u, 5u, 64u, 303u}) {
      for (std::size_t cols : {1u, 3u, 4u, 7u, 9u, 17u}) {
        const auto m = random_vec(rows * cols, rng);
        const auto x = random_vec(cols, rng), v = random_vec(rows, rng);
        auto w = random_vec(rows, rng);
        for (auto& e : w) e = std::abs(e);
        std::vector<double> y1(rows), y2(rows), t1(cols), t2(cols), g1(cols * cols), g2(cols * cols);
        k.gemv(m.data(), rows, cols, x.data(), y1.data());
        ref.gemv(m.data(), rows, cols, x.data(), y2.data());
        k.gemv_t(m.data(), rows, cols, v.data(), t1.data());
        ref.gemv_t(m.data(), rows, cols, v.data(), t2.data());
        k.weighted_gram(m.data(), rows, cols, w.data(), g1.data());
        ref.weighted_gram(m.data(), rows, cols, w.data(), g2.data());
        const double s = 100.0 * static_cast<double>(rows * cols);
        for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], tol(s));
        for (std::size_t j = 0; j < cols; ++j) EXPECT_NEAR(t1[j], t2[j], tol(s));
        for (std::size_t j = 0; j < cols * cols; ++j) EXPECT_NEAR(g1[j], g2[j], tol(s));
      }
    }
  }
}

TEST(Simd, GramIsSymmetric) {
  std::mt19937_64 rng(3);
  const std::size_t rows = 50, cols = 6;
  const auto m = random_vec(rows * cols, rng);
  std::vector<double> w(rows, 1.0), g(cols * cols);
  weighted_gram(m, cols, w, g);
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = 0; j < cols; ++j) EXPECT_EQ(g[i * cols + j], g[j * cols + i]);
}
