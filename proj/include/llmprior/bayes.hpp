#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llmprior/dataset.hpp"
#include "llmprior/gaussian.hpp"
#include "llmprior/glm.hpp"
#include "llmprior/priors.hpp"

namespace llmprior {

enum class PosteriorMethod { laplace_logistic, conjugate_linear };

std::string to_string(PosteriorMethod method);

/// Gaussian posterior N(mode, covariance) for the regression coefficients.
struct PosteriorFit {
  std::vector<std::string> names;
  Eigen::VectorXd mode;
  Eigen::MatrixXd covariance;
  std::vector<GaussianDist> marginals;
  PosteriorMethod method = PosteriorMethod::laplace_logistic;
  std::string prior_label;
  std::optional<double> noise_variance;  // conjugate_linear only
  int iterations = 0;
};

/// Prior means and precisions (1/sd^2) in design-column order. The prior
/// must validate against the model spec.
GaussianPenalty prior_penalty(const PriorSet& prior, const ModelSpec& spec);

/// Laplace approximation: Newton on log-likelihood + log-prior, covariance
/// from the inverse negative Hessian at the mode.
PosteriorFit posterior_logistic_laplace(const BoundDataset& data, const PriorSet& prior,
                                        const IrlsOptions& options = {});

/// Conjugate Gaussian update with the noise variance fixed at the OLS
/// estimate RSS/(n-d).
PosteriorFit posterior_linear_conjugate(const BoundDataset& data, const PriorSet& prior);

/// Dispatches on the response kind.
PosteriorFit fit_posterior(const BoundDataset& data, const PriorSet& prior, const IrlsOptions& options = {});

double log_posterior_logistic(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                              const GaussianPenalty& prior);
Eigen::VectorXd log_posterior_logistic_gradient(const DesignMatrix& x, const Eigen::VectorXd& y,
                                                const Eigen::VectorXd& beta, const GaussianPenalty& prior);

inline constexpr int default_mc_draws = 1000;

/// Monte Carlo posterior predictive for the logistic model. Coefficient
/// vectors are drawn once from N(mode, covariance) with the given seed and
/// shared across every row scored, so predictions from two samplers with the
/// same fit and seed are identical.
class PosteriorSampler {
 public:
  PosteriorSampler(const PosteriorFit& fit, int draws, std::uint64_t seed);

  /// Average of sigmoid(x . beta_s) over the draws.
  double predictive_binary(std::span<const double> x_row) const;
  int draws() const noexcept { return static_cast<int>(draws_.rows()); }

 private:
  DesignMatrix draws_;  // draws x d
};

double predictive_binary(const PosteriorFit& fit, std::span<const double> x_row, int draws = default_mc_draws,
                         std::uint64_t seed = 0);

/// N(x . mode, x^T covariance x + noise_variance).
GaussianDist predictive_gaussian(const PosteriorFit& fit, std::span<const double> x_row);

/// Symmetric square root factor L with L L^T = cov, tolerant of a zero or
/// rank-deficient covariance.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

}  // namespace llmprior
