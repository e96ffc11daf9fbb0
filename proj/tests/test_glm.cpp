#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "llmprior/errors.hpp"
#include "llmprior/glm.hpp"
#include "support.hpp"

using namespace llmprior;
namespace ts = testing_support;

TEST(Glm, SigmoidAndSoftplusAreStableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(800.0), 1.0, 0.0);
  EXPECT_GT(sigmoid(-800.0), -1e-300);
  EXPECT_TRUE(std::isfinite(softplus(800.0)));
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(softplus(-40.0), std::exp(-40.0), 1e-25);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
}

TEST(Glm, OlsMatchesNormalEquations) {
  Eigen::VectorXd beta(4);
  beta << 1.0, -2.0, 0.5, 3.0;
  const BoundDataset d = ts::linear_data(beta, 0.7, 200, 5);
  const MLEFit fit = fit_linear_mle(d);
  const Eigen::MatrixXd x = d.design();
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd ne = xtx.ldlt().solve(x.transpose() * d.response());
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(fit.coefficients[j], ne[j], 1e-10);

  const Eigen::VectorXd r = d.response() - x * ne;
  const double s2 = r.squaredNorm() / (200 - 4);
  EXPECT_NEAR(*fit.noise_variance, s2, 1e-10);
  const Eigen::MatrixXd cov = s2 * xtx.inverse();
  EXPECT_LE((fit.covariance - cov).cwiseAbs().maxCoeff(), 1e-12);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(fit.marginals[j].sd(), std::sqrt(cov(j, j)), 1e-12);
  EXPECT_TRUE(fit.converged);
}

TEST(Glm, OlsErrors) {
  // Duplicate column: rank deficient.
  ModelSpec s = ts::toy_spec(2, ResponseKind::continuous);
  Eigen::MatrixXd x(5, 2);
  x << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
  Eigen::VectorXd y(5);
  y << 1, 3, 2, 5, 4;
  EXPECT_THROW(fit_linear_mle(make_dataset(s, x, y)), SingularMatrixError);

  // n <= d
  ModelSpec s1 = ts::toy_spec(1, ResponseKind::continuous);
  Eigen::MatrixXd x2(2, 1);
  x2 << 1, 2;
  Eigen::VectorXd y2(2);
  y2 << 1, 2;
  EXPECT_THROW(fit_linear_mle(make_dataset(s1, x2, y2)), SingularMatrixError);

  // exact fit: zero residual
  Eigen::MatrixXd x3(4, 1);
  x3 << 1, 2, 3, 4;
  Eigen::VectorXd y3(4);
  y3 << 3, 5, 7, 9;
  try {
    fit_linear_mle(make_dataset(s1, x3, y3));
    FAIL();
  } catch (const DegenerateDataError& e) {
    ASSERT_EQ(e.coefficients().size(), 2u);
    EXPECT_NEAR(e.coefficients()[0], 1.0, 1e-10);
    EXPECT_NEAR(e.coefficients()[1], 2.0, 1e-10);
  }
}

TEST(Glm, LogisticInterceptOnlyIsLogitOfMean) {
  ModelSpec s = ts::toy_spec(0, ResponseKind::binary);
  Eigen::MatrixXd x(10, 0);
  Eigen::VectorXd y(10);
  y << 1, 0, 0, 1, 1, 0, 1, 1, 1, 0;
  const MLEFit fit = fit_logistic_mle(make_dataset(s, x, y));
  EXPECT_NEAR(fit.coefficients[0], std::log(0.6 / 0.4), 1e-10);
  // observed information n p (1 - p)
  EXPECT_NEAR(fit.covariance(0, 0), 1.0 / (10 * 0.6 * 0.4), 1e-10);
}

TEST(Glm, LogisticGradientVanishesAndCovarianceIsInverseInformation) {
  Eigen::VectorXd beta(3);
  beta << -0.5, 1.0, -0.8;
  const BoundDataset d = ts::logistic_data(beta, 400, 17);
  const MLEFit fit = fit_logistic_mle(d);
  EXPECT_TRUE(fit.converged);
  const Eigen::VectorXd g = logistic_gradient(d.design(), d.response(), fit.coefficients);
  EXPECT_LE(g.lpNorm<Eigen::Infinity>(), 1e-8);
  const Eigen::MatrixXd info = logistic_information(d.design(), fit.coefficients);
  EXPECT_LE((fit.covariance * info - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(fit.loglik, logistic_loglik(d.design(), d.response(), fit.coefficients), 1e-12);
  for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(fit.coefficients[j] - beta[j]), 4 * fit.marginals[j].sd());
}

TEST(Glm, SeparationIsDivergence) {
  ModelSpec s = ts::toy_spec(1, ResponseKind::binary);
  Eigen::MatrixXd x(2, 1);
  x << -1, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  try {
    fit_logistic_mle(make_dataset(s, x, y));
    FAIL();
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.cause(), NonConvergenceCause::divergence);
  }
}

TEST(Glm, IterationCapIsReported) {
  Eigen::VectorXd beta(2);
  beta << 0.2, 0.7;
  const BoundDataset d = ts::logistic_data(beta, 200, 4);
  IrlsOptions opts;
  opts.max_iter = 1;
  try {
    fit_logistic_mle(d, opts);
    FAIL();
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.cause(), NonConvergenceCause::iteration_cap);
  }
}

TEST(Glm, LogisticRejectsCollinearDesign) {
  ModelSpec s = ts::toy_spec(2, ResponseKind::binary);
  Eigen::MatrixXd x(6, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  Eigen::VectorXd y(6);
  y << 0, 1, 0, 1, 1, 0;
  EXPECT_THROW(fit_logistic_mle(make_dataset(s, x, y)), SingularMatrixError);
}

TEST(Glm, AnalyticGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z(0.0, 0.5);
  Eigen::VectorXd b0(4);
  b0 << 0.3, -0.6, 0.9, 0.1;
  const BoundDataset lg = ts::logistic_data(b0, 150, 2);
  const BoundDataset ln = ts::linear_data(b0, 1.3, 150, 2);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd b(4);
    for (int j = 0; j < 4; ++j) b[j] = z(rng);
    auto f = [&](const Eigen::VectorXd& v) { return logistic_loglik(lg.design(), lg.response(), v); };
    EXPECT_LE(ts::relative_error(ts::numeric_gradient(f, b), logistic_gradient(lg.design(), lg.response(), b)), 1e-4);
    auto h = [&](const Eigen::VectorXd& v) { return gaussian_loglik(ln.design(), ln.response(), v, 1.7); };
    EXPECT_LE(ts::relative_error(ts::numeric_gradient(h, b), gaussian_gradient(ln.design(), ln.response(), b, 1.7)),
              1e-4);
  }
}

TEST(Glm, HeartAndConcreteSigns) {
  const MLEFit heart = fit_mle(ts::heart_data());
  const auto& c = heart.coefficients;
  EXPECT_GT(c[1], 0);  // age
  EXPECT_GT(c[2], 0);  // sex
  EXPECT_GT(c[3], 0);  // trestbps
  EXPECT_GT(c[4], 0);  // chol
  EXPECT_LT(c[5], 0);  // thalach
  EXPECT_GT(c[6], 0);  // oldpeak
  const MLEFit concrete = fit_mle(ts::concrete_data());
  EXPECT_GT(concrete.coefficients[1], 0);  // cement
  EXPECT_LT(concrete.coefficients[4], 0);  // water
}

TEST(Bootstrap, DeterministicAndCloseToFisher) {
  Eigen::VectorXd beta(3);
  beta << 2.0, -1.0, 0.5;
  const BoundDataset d = ts::linear_data(beta, 1.0, 500, 8);
  const BootstrapResult a = bootstrap_mle(d, 200, 99);
  const BootstrapResult b = bootstrap_mle(d, 200, 99);
  ASSERT_EQ(a.replicates.size(), 200u);
  EXPECT_EQ(a.skipped, 0);
  for (std::size_t r = 0; r < a.replicates.size(); ++r) EXPECT_EQ(a.replicates[r], b.replicates[r]);
  const MLEFit fit = fit_linear_mle(d);
  for (int j = 0; j < 3; ++j)
    EXPECT_NEAR(a.summary[j].sd() / fit.marginals[j].sd(), 1.0, 0.25) << "coefficient " << j;
}

TEST(Bootstrap, RejectsTooFewReplicates) {
  Eigen::VectorXd beta(2);
  beta << 0.0, 1.0;
  const BoundDataset d = ts::linear_data(beta, 1.0, 50, 1);
  EXPECT_THROW(bootstrap_mle(d, 1, 0), ArgumentError);
}

TEST(Bootstrap, FailsWhenMostReplicatesFail) {
  // Separated data: every resample is separable or single-class.
  ModelSpec s = ts::toy_spec(1, ResponseKind::binary);
  Eigen::MatrixXd x(8, 1);
  x << -4, -3, -2, -1, 1, 2, 3, 4;
  Eigen::VectorXd y(8);
  y << 0, 0, 0, 0, 1, 1, 1, 1;
  EXPECT_THROW(bootstrap_mle(make_dataset(s, x, y), 50, 3), BootstrapFailureError);
}
