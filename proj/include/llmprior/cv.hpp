#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "llmprior/bayes.hpp"
#include "llmprior/dataset.hpp"
#include "llmprior/gaussian.hpp"
#include "llmprior/glm.hpp"
#include "llmprior/priors.hpp"

namespace llmprior {

inline constexpr double log_score_eps = 1e-12;

// Metrics. Length mismatches throw ArgumentError.
double brier(std::span<const double> probs, std::span<const double> labels);
double mnls_binary(std::span<const double> probs, std::span<const double> labels);
/// Mann-Whitney AUC, ties count 1/2. Single-class labels throw ValidationError.
double auc(std::span<const double> scores, std::span<const double> labels);
double rmse(std::span<const double> preds, std::span<const double> truth);
double mae(std::span<const double> preds, std::span<const double> truth);
double mnls_gaussian(const std::vector<GaussianDist>& predictive, std::span<const double> truth);

struct TTestResult {
  double t_stat = 0.0;
  double p_value = 0.5;
  bool degenerate = false;  // zero variance: t is not defined, p fixed at 0.5
};

/// Corrected resampled t-test. `diffs` are oriented so positive favours the
/// alternative; p is the one-sided upper-tail probability with k-1 df.
TTestResult nb_ttest(const std::vector<double>& diffs, double n_train, double n_test);

struct MetricSpec {
  std::string name;
  bool higher_is_better = false;
};

/// brier/mnls/auc for binary responses, mnls/rmse/mae for continuous ones.
std::vector<MetricSpec> metrics_for(ResponseKind kind);

struct MetricResult {
  std::vector<double> per_fold;
  double mean = 0.0;
};

struct ModelResult {
  std::string label;
  std::vector<MetricResult> metrics;  // parallel to CVReport::metrics
};

struct Comparison {
  std::string model;
  std::string metric;
  TTestResult test;
};

struct CVReport {
  std::vector<MetricSpec> metrics;
  std::vector<ModelResult> models;  // "Frequentist" first, then catalog order
  std::vector<Comparison> comparisons;
  FoldPlan folds;
  std::uint64_t seed = 0;
  int mc_draws = 0;
  double n_train = 0.0;  // average fold sizes used by the t-test correction
  double n_test = 0.0;

  const ModelResult& model(const std::string& label) const;
  const MetricResult& metric(const std::string& model_label, const std::string& metric_name) const;
  const Comparison& comparison(const std::string& model_label, const std::string& metric_name) const;
};

struct CVConfig {
  int mc_draws = default_mc_draws;
  std::uint64_t seed = 0;
  IrlsOptions irls;
};

inline constexpr const char* frequentist_label = "Frequentist";

/// Fits the MLE and one posterior per prior set on every training fold and
/// scores the held-out rows. Monte Carlo draws for fold f are seeded from
/// (config.seed, f) only.
CVReport run_cv(const BoundDataset& data, const PriorCatalog& catalog, const FoldPlan& folds,
                const CVConfig& config = {});

/// Models as rows, metrics as columns, p-values in parentheses.
std::string format_cv_table(const CVReport& report);

}  // namespace llmprior
