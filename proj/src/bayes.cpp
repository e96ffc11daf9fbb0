#include "llmprior/bayes.hpp"

#include <cmath>
#include <random>

#include "llmprior/errors.hpp"
#include "llmprior/simd/kernels.hpp"

namespace llmprior {

std::string to_string(PosteriorMethod method) {
  return method == PosteriorMethod::laplace_logistic ? "laplace_logistic" : "conjugate_linear";
}

GaussianPenalty prior_penalty(const PriorSet& prior, const ModelSpec& spec) {
  const auto report = validate_prior_set(prior, spec);
  if (!report.empty())
    throw ValidationError("prior set '" + prior.label + "' does not match model '" + spec.id +
                          "': " + report.front().message);
  const auto names = spec.coefficient_names();
  const auto d = static_cast<Eigen::Index>(names.size());
  GaussianPenalty pen{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const PriorEntry& e = prior.entry(names[static_cast<std::size_t>(j)]);
    pen.mean[j] = e.mean;
    pen.precision[j] = 1.0 / (e.sd * e.sd);
  }
  return pen;
}

double log_posterior_logistic(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                              const GaussianPenalty& prior) {
  return logistic_loglik(x, y, beta) -
         0.5 * (prior.precision.array() * (beta - prior.mean).array().square()).sum();
}

Eigen::VectorXd log_posterior_logistic_gradient(const DesignMatrix& x, const Eigen::VectorXd& y,
                                                const Eigen::VectorXd& beta, const GaussianPenalty& prior) {
  Eigen::VectorXd g = logistic_gradient(x, y, beta);
  g.array() -= prior.precision.array() * (beta - prior.mean).array();
  return g;
}

PosteriorFit posterior_logistic_laplace(const BoundDataset& data, const PriorSet& prior, const IrlsOptions& options) {
  if (data.spec().response_kind != ResponseKind::binary)
    throw ArgumentError("Laplace logistic posterior requires a binary response");
  const GaussianPenalty pen = prior_penalty(prior, data.spec());
  const LogisticMode mode = logistic_newton(data.design(), data.response(), &pen, options);

  PosteriorFit fit;
  fit.names = data.spec().coefficient_names();
  fit.mode = mode.beta;
  fit.covariance = mode.covariance;
  fit.marginals = marginals_from(mode.beta, mode.covariance);
  fit.method = PosteriorMethod::laplace_logistic;
  fit.prior_label = prior.label;
  fit.iterations = mode.iterations;
  return fit;
}

PosteriorFit posterior_linear_conjugate(const BoundDataset& data, const PriorSet& prior) {
  if (data.spec().response_kind != ResponseKind::continuous)
    throw ArgumentError("conjugate linear posterior requires a continuous response");
  if (data.n() <= data.d())
    throw ArgumentError("conjugate linear posterior needs n > d (n=" + std::to_string(data.n()) +
                        ", d=" + std::to_string(data.d()) + ")");
  const GaussianPenalty pen = prior_penalty(prior, data.spec());
  const MLEFit ols = fit_linear_mle(data);
  const double sigma2 = *ols.noise_variance;

  const DesignMatrix& x = data.design();
  const auto d = x.cols();
  Eigen::MatrixXd precision = weighted_gram(x, Eigen::VectorXd::Ones(x.rows())) / sigma2;
  precision.diagonal() += pen.precision;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw SingularMatrixError("posterior precision is not positive definite");

  Eigen::VectorXd xty(d);
  simd::gemv_t({x.data(), static_cast<std::size_t>(x.size())}, static_cast<std::size_t>(d),
               {data.response().data(), static_cast<std::size_t>(data.response().size())},
               {xty.data(), static_cast<std::size_t>(d)});
  const Eigen::VectorXd rhs = pen.precision.cwiseProduct(pen.mean) + xty / sigma2;

  PosteriorFit fit;
  fit.names = data.spec().coefficient_names();
  fit.mode = llt.solve(rhs);
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
  fit.covariance = 0.5 * (cov + cov.transpose());
  fit.marginals = marginals_from(fit.mode, fit.covariance);
  fit.method = PosteriorMethod::conjugate_linear;
  fit.prior_label = prior.label;
  fit.noise_variance = sigma2;
  fit.iterations = 1;
  return fit;
}

PosteriorFit fit_posterior(const BoundDataset& data, const PriorSet& prior, const IrlsOptions& options) {
  return data.spec().response_kind == ResponseKind::binary ? posterior_logistic_laplace(data, prior, options)
                                                           : posterior_linear_conjugate(data, prior);
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

PosteriorSampler::PosteriorSampler(const PosteriorFit& fit, int draws, std::uint64_t seed) {
  if (fit.method != PosteriorMethod::laplace_logistic)
    throw ArgumentError("binary predictive requires a laplace_logistic posterior");
  if (draws < 1) throw ArgumentError("Monte Carlo draw count must be >= 1");
  const auto d = fit.mode.size();
  const Eigen::MatrixXd factor = covariance_factor(fit.covariance);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  draws_.resize(draws, d);
  Eigen::VectorXd z(d);
  for (int s = 0; s < draws; ++s) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    draws_.row(s) = (fit.mode + factor * z).transpose();
  }
}

double PosteriorSampler::predictive_binary(std::span<const double> x_row) const {
  if (static_cast<Eigen::Index>(x_row.size()) != draws_.cols())
    throw ArgumentError("row has " + std::to_string(x_row.size()) + " entries, fit has " +
                        std::to_string(draws_.cols()) + " coefficients");
  std::vector<double> eta(static_cast<std::size_t>(draws_.rows()));
  simd::gemv({draws_.data(), static_cast<std::size_t>(draws_.size())}, x_row.size(), x_row, eta);
  double sum = 0.0;
  for (double e : eta) sum += sigmoid(e);
  return sum / static_cast<double>(eta.size());
}

double predictive_binary(const PosteriorFit& fit, std::span<const double> x_row, int draws, std::uint64_t seed) {
  return PosteriorSampler(fit, draws, seed).predictive_binary(x_row);
}

GaussianDist predictive_gaussian(const PosteriorFit& fit, std::span<const double> x_row) {
  if (fit.method != PosteriorMethod::conjugate_linear)
    throw ArgumentError("Gaussian predictive requires a conjugate_linear posterior");
  const auto d = fit.mode.size();
  if (static_cast<Eigen::Index>(x_row.size()) != d)
    throw ArgumentError("row has " + std::to_string(x_row.size()) + " entries, fit has " + std::to_string(d) +
                        " coefficients");
  const Eigen::Map<const Eigen::VectorXd> x(x_row.data(), d);
  const double mean = x.dot(fit.mode);
  const double var = x.dot(fit.covariance * x) + fit.noise_variance.value_or(0.0);
  return GaussianDist(mean, std::sqrt(var));
}

}  // namespace llmprior
