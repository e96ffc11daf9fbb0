#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llmprior/dataset.hpp"
#include "llmprior/gaussian.hpp"

namespace llmprior {

struct IrlsOptions {
  double tol = 1e-8;  // gradient max-norm
  int max_iter = 100;
  double divergence_bound = 1e4;  // coefficient max-norm that signals separation
};

/// Maximum-likelihood fit with its Gaussian sampling-distribution
/// approximation N(coefficients, covariance).
struct MLEFit {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  std::vector<GaussianDist> marginals;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<double> noise_variance;  // linear model only
};

/// Independent Gaussian log-density term -(1/2) sum_j precision_j (b_j - mean_j)^2
/// added to the logistic log-likelihood.
struct GaussianPenalty {
  Eigen::VectorXd mean;
  Eigen::VectorXd precision;
};

struct LogisticMode {
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;  // inverse negative Hessian of the objective
  double objective = 0.0;
  double loglik = 0.0;
  int iterations = 0;
};

/// Newton iterations maximizing the logistic log-likelihood (plus the
/// penalty when given). Converged when the gradient max-norm is <= tol and
/// the Newton step is negligible. Throws NonConvergenceError with cause
/// `divergence` on separation and `iteration_cap` otherwise.
LogisticMode logistic_newton(const DesignMatrix& x, const Eigen::VectorXd& y, const GaussianPenalty* penalty,
                             const IrlsOptions& options);

/// Logistic regression by Newton/IRLS. Covariance is the inverse observed
/// information at the MLE.
MLEFit fit_logistic_mle(const BoundDataset& data, const IrlsOptions& options = {});

/// Ordinary least squares via column-pivoted QR. noise_variance = RSS/(n-d),
/// covariance = noise_variance * (X^T X)^-1.
MLEFit fit_linear_mle(const BoundDataset& data);

/// Dispatches on the response kind.
MLEFit fit_mle(const BoundDataset& data, const IrlsOptions& options = {});

struct BootstrapResult {
  std::vector<Eigen::VectorXd> replicates;  // successful refits, replicate order
  std::vector<int> replicate_ids;           // which replicate each entry came from
  std::vector<GaussianDist> summary;        // per-coefficient mean/sd over replicates
  int requested = 0;
  int skipped = 0;
};

/// Case-resampling bootstrap. Replicate r draws from a generator seeded by
/// (seed, r), so results do not depend on scheduling. Replicates whose refit
/// fails numerically are skipped; more than half skipped is an error.
BootstrapResult bootstrap_mle(const BoundDataset& data, int reps, std::uint64_t seed,
                              const IrlsOptions& options = {});

// Log-likelihood pieces, exposed for gradient checks and the posterior code.
double logistic_loglik(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_gradient(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);
/// Negative Hessian X^T W X with W = p(1-p).
Eigen::MatrixXd logistic_information(const DesignMatrix& x, const Eigen::VectorXd& beta);

double gaussian_loglik(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                       double noise_variance);
Eigen::VectorXd gaussian_gradient(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                  double noise_variance);

/// Numerically stable log(1 + exp(t)) and 1/(1 + exp(-t)).
double softplus(double t) noexcept;
double sigmoid(double t) noexcept;

/// Marginals N(mean_i, sqrt(cov_ii)).
std::vector<GaussianDist> marginals_from(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance);

/// X^T diag(w) X through the SIMD kernel layer.
Eigen::MatrixXd weighted_gram(const DesignMatrix& x, const Eigen::VectorXd& w);

}  // namespace llmprior
