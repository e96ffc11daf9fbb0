#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llmprior/dataset.hpp"
#include "llmprior/gaussian.hpp"
#include "llmprior/glm.hpp"
#include "llmprior/priors.hpp"

namespace llmprior {

/// KL(mle || prior) in nats, weighting by the MLE density.
double kl_gaussian(const GaussianDist& mle, const GaussianDist& prior);

// Inputs may arrive unvalidated (e.g. from parsed text).
double kl_gaussian(double mle_mean, double mle_sd, double prior_mean, double prior_sd);

/// Per-coefficient KL of each prior set against the MLE marginals.
struct KLReport {
  std::vector<std::string> coefficients;  // predictors only, spec order
  std::vector<std::string> labels;        // column order
  std::vector<std::string> sources;
  std::vector<Informativeness> informativeness;
  std::vector<std::vector<double>> values;  // [coefficient][column]
  std::vector<double> averages;             // per column
  std::vector<double> avg_ranks;            // per column; rank 1 = lowest KL
  std::string mle_method = "fisher";        // "fisher" or "bootstrap"

  double at(const std::string& coefficient, const std::string& label) const;
  double average(const std::string& label) const;
  double avg_rank(const std::string& label) const;
};

/// Ranks 1..m with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Columns are ordered moderate, weak, custom, then by source, then label.
KLReport kl_table(const MLEFit& mle, const PriorCatalog& catalog, const ModelSpec& spec);
/// Same, with MLE marginals supplied directly (e.g. from the bootstrap).
KLReport kl_table(const std::vector<GaussianDist>& mle_marginals, const PriorCatalog& catalog, const ModelSpec& spec,
                  const std::string& mle_method);

/// Aligned plain-text table: variables as rows, prior sets as columns, with
/// source and informativeness header rows and Avg KL Div. / Avg Rank footers.
std::string format_kl_table(const KLReport& report);

struct PredictiveSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q975 = 0.0;
};

struct PriorPredictive {
  Eigen::MatrixXd samples;  // reps x n simulated responses
  PredictiveSummary summary;
};

/// Draws theta from the prior, then a response vector from the likelihood at
/// theta on `design` (which includes the intercept column when the model spec has
/// one). Linear models need `noise_sd`.
PriorPredictive prior_predictive_sample(const ModelSpec& spec, const PriorSet& prior, const DesignMatrix& design,
                                        int reps, std::uint64_t seed, std::optional<double> noise_sd = std::nullopt);

/// Linear-interpolation quantile (R type 7) of unsorted data.
double quantile(std::vector<double> values, double q);

}  // namespace llmprior
