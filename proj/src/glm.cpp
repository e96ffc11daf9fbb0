#include "llmprior/glm.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include "llmprior/errors.hpp"
#include "llmprior/parallel.hpp"
#include "llmprior/simd/kernels.hpp"

namespace llmprior {
namespace {

std::span<const double> span_of(const DesignMatrix& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}

std::span<const double> span_of(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> span_of(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Eigen::VectorXd linear_predictor(const DesignMatrix& x, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta(x.rows());
  simd::gemv(span_of(x), static_cast<std::size_t>(x.cols()), span_of(beta), span_of(eta));
  return eta;
}

Eigen::VectorXd transpose_times(const DesignMatrix& x, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(x.cols());
  simd::gemv_t(span_of(x), static_cast<std::size_t>(x.cols()), span_of(v), span_of(out));
  return out;
}

void require_full_rank(const DesignMatrix& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols())
    throw SingularMatrixError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(x.cols()) + ")");
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Eigen::MatrixXd weighted_gram(const DesignMatrix& x, const Eigen::VectorXd& w) {
  const auto d = x.cols();
  Eigen::MatrixXd g(d, d);  // symmetric, so storage order does not matter
  simd::weighted_gram(span_of(x), static_cast<std::size_t>(d), span_of(w),
                      {g.data(), static_cast<std::size_t>(g.size())});
  return g;
}

std::vector<GaussianDist> marginals_from(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance) {
  std::vector<GaussianDist> out;
  out.reserve(static_cast<std::size_t>(mean.size()));
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double var = covariance(i, i);
    if (!(var > 0.0) || !std::isfinite(var))
      throw NumericError("non-positive variance " + std::to_string(var) + " on coefficient " + std::to_string(i));
    out.emplace_back(mean[i], std::sqrt(var));
  }
  return out;
}

double logistic_loglik(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = linear_predictor(x, beta);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  return ll;
}

Eigen::VectorXd logistic_gradient(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = linear_predictor(x, beta);
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = y[i] - sigmoid(eta[i]);
  return transpose_times(x, r);
}

Eigen::MatrixXd logistic_information(const DesignMatrix& x, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = linear_predictor(x, beta);
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = sigmoid(eta[i]);
    w[i] = p * (1.0 - p);
  }
  return weighted_gram(x, w);
}

double gaussian_loglik(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                       double noise_variance) {
  const Eigen::VectorXd mu = linear_predictor(x, beta);
  const double rss = simd::sum_sq_diff(span_of(y), span_of(mu));
  const double n = static_cast<double>(y.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * noise_variance) - 0.5 * rss / noise_variance;
}

Eigen::VectorXd gaussian_gradient(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                  double noise_variance) {
  const Eigen::VectorXd r = y - linear_predictor(x, beta);
  return transpose_times(x, r) / noise_variance;
}

namespace {

// Separation signature: some fitted probabilities have saturated onto their
// observed labels.
bool saturated(const DesignMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = linear_predictor(x, beta);
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (std::abs(eta[i]) > 25.0 && (eta[i] > 0.0) == (y[i] == 1.0)) return true;
  return false;
}

double penalty_value(const GaussianPenalty* pen, const Eigen::VectorXd& beta) {
  if (!pen) return 0.0;
  return -0.5 * (pen->precision.array() * (beta - pen->mean).array().square()).sum();
}

}  // namespace

LogisticMode logistic_newton(const DesignMatrix& x, const Eigen::VectorXd& y, const GaussianPenalty* penalty,
                             const IrlsOptions& options) {
  const auto d = x.cols();
  if (penalty && (penalty->mean.size() != d || penalty->precision.size() != d))
    throw ArgumentError("penalty dimension does not match the design");
  auto objective = [&](const Eigen::VectorXd& b) { return logistic_loglik(x, y, b) + penalty_value(penalty, b); };

  Eigen::VectorXd beta = penalty ? penalty->mean : Eigen::VectorXd::Zero(d);
  double obj = objective(beta);
  int iter = 0;
  bool converged = false;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (;; ++iter) {
    Eigen::VectorXd grad = logistic_gradient(x, y, beta);
    Eigen::MatrixXd info = logistic_information(x, beta);
    if (penalty) {
      grad.array() -= penalty->precision.array() * (beta - penalty->mean).array();
      info.diagonal() += penalty->precision;
    }
    llt.compute(info);
    if (llt.info() != Eigen::Success) {
      if (saturated(x, y, beta))
        throw NonConvergenceError(NonConvergenceCause::divergence, iter,
                                  "logistic fit diverged: fitted probabilities saturated (quasi-complete separation)");
      throw SingularMatrixError("logistic fit: information matrix is singular");
    }
    const Eigen::VectorXd step = llt.solve(grad);
    // The gradient alone also vanishes along a separating direction, so the
    // Newton step must be small as well. A step below rounding level also
    // stops: with near-dogmatic penalties the gradient cannot be resolved to
    // tol in double precision.
    const double beta_scale = 1.0 + beta.lpNorm<Eigen::Infinity>();
    const double step_norm = step.lpNorm<Eigen::Infinity>();
    if ((grad.lpNorm<Eigen::Infinity>() <= options.tol && step_norm <= 1e-6 * beta_scale) ||
        step_norm <= 1e-14 * beta_scale) {
      converged = true;
      break;
    }
    if (iter >= options.max_iter) break;

    // Step halving; the objective is concave so this only triggers far from
    // the optimum.
    double t = 1.0;
    Eigen::VectorXd trial = beta + step;
    double trial_obj = objective(trial);
    while (!(trial_obj >= obj - 1e-12 * std::abs(obj)) && t > 1e-10) {
      t *= 0.5;
      trial = beta + t * step;
      trial_obj = objective(trial);
    }
    beta = trial;
    obj = trial_obj;
    if (beta.lpNorm<Eigen::Infinity>() > options.divergence_bound)
      throw NonConvergenceError(NonConvergenceCause::divergence, iter + 1,
                                "logistic fit diverged: coefficient max-norm exceeded " +
                                    std::to_string(options.divergence_bound) + " (quasi-complete separation)");
  }
  if (!converged) {
    if (saturated(x, y, beta))
      throw NonConvergenceError(NonConvergenceCause::divergence, iter,
                                "logistic fit diverged: fitted probabilities saturated (quasi-complete separation)");
    throw NonConvergenceError(NonConvergenceCause::iteration_cap, iter,
                              "logistic fit did not reach gradient tolerance in " + std::to_string(options.max_iter) +
                                  " iterations");
  }

  LogisticMode mode;
  mode.beta = beta;
  mode.covariance = symmetrize(llt.solve(Eigen::MatrixXd::Identity(d, d)));
  mode.objective = obj;
  mode.loglik = logistic_loglik(x, y, beta);
  mode.iterations = iter;
  return mode;
}

MLEFit fit_logistic_mle(const BoundDataset& data, const IrlsOptions& options) {
  if (data.spec().response_kind != ResponseKind::binary)
    throw ArgumentError("logistic fit requires a binary response");
  if (data.n() == 0) throw EmptyDataError("logistic fit on empty data");
  require_full_rank(data.design());

  const LogisticMode mode = logistic_newton(data.design(), data.response(), nullptr, options);
  MLEFit fit;
  fit.names = data.spec().coefficient_names();
  fit.coefficients = mode.beta;
  fit.covariance = mode.covariance;
  fit.marginals = marginals_from(mode.beta, mode.covariance);
  fit.loglik = mode.loglik;
  fit.iterations = mode.iterations;
  fit.converged = true;
  return fit;
}

MLEFit fit_linear_mle(const BoundDataset& data) {
  if (data.spec().response_kind != ResponseKind::continuous)
    throw ArgumentError("linear fit requires a continuous response");
  const DesignMatrix& x = data.design();
  const Eigen::VectorXd& y = data.response();
  const auto n = x.rows();
  const auto d = x.cols();
  if (n <= d)
    throw SingularMatrixError("linear fit needs n > d (n=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < d)
    throw SingularMatrixError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(d) + ")");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd fitted = linear_predictor(x, beta);
  const double rss = simd::sum_sq_diff(span_of(y), span_of(fitted));
  if (rss <= 1e-24 * std::max(1.0, y.squaredNorm()))
    throw DegenerateDataError("zero residual variance: the data lie exactly on the fitted hyperplane",
                              std::vector<double>(beta.data(), beta.data() + beta.size()));
  const double sigma2 = rss / static_cast<double>(n - d);

  // (X^T X)^-1 = P R^-1 R^-T P^T from X P = Q R.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(d, d).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(d, d));
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();

  MLEFit fit;
  fit.names = data.spec().coefficient_names();
  fit.coefficients = beta;
  fit.covariance = symmetrize(sigma2 * xtx_inv);
  fit.marginals = marginals_from(beta, fit.covariance);
  fit.noise_variance = sigma2;
  fit.loglik = gaussian_loglik(x, y, beta, sigma2);
  fit.iterations = 1;
  fit.converged = true;
  return fit;
}

MLEFit fit_mle(const BoundDataset& data, const IrlsOptions& options) {
  return data.spec().response_kind == ResponseKind::binary ? fit_logistic_mle(data, options) : fit_linear_mle(data);
}

BootstrapResult bootstrap_mle(const BoundDataset& data, int reps, std::uint64_t seed, const IrlsOptions& options) {
  if (reps < 2) throw ArgumentError("bootstrap needs reps >= 2, got " + std::to_string(reps));
  if (data.n() == 0) throw EmptyDataError("bootstrap on empty data");

  const std::size_t n = data.n();
  std::vector<std::optional<Eigen::VectorXd>> slots(static_cast<std::size_t>(reps));
  parallel_for(slots.size(), [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& row : rows) row = pick(rng);
    try {
      slots[r] = fit_mle(data.subset(rows), options).coefficients;
    } catch (const NumericError&) {
      slots[r].reset();
    }
  });

  BootstrapResult out;
  out.requested = reps;
  for (std::size_t r = 0; r < slots.size(); ++r) {
    if (slots[r]) {
      out.replicates.push_back(*slots[r]);
      out.replicate_ids.push_back(static_cast<int>(r));
    } else {
      ++out.skipped;
    }
  }
  if (2 * out.skipped > reps || out.replicates.size() < 2)
    throw BootstrapFailureError("bootstrap: " + std::to_string(out.skipped) + " of " + std::to_string(reps) +
                                " replicates failed to converge");

  const auto d = data.design().cols();
  const double m = static_cast<double>(out.replicates.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& b : out.replicates) mean += b;
  mean /= m;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& b : out.replicates) var += (b - mean).cwiseAbs2();
  var /= (m - 1.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(var[j] > 0.0)) throw BootstrapFailureError("bootstrap: zero spread on coefficient " + std::to_string(j));
    out.summary.emplace_back(mean[j], std::sqrt(var[j]));
  }
  return out;
}

}  // namespace llmprior
