#include "llmprior/cv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "llmprior/errors.hpp"
#include "llmprior/parallel.hpp"
#include "llmprior/simd/kernels.hpp"

namespace llmprior {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ArgumentError(fmt::format("{}: length mismatch ({} vs {})", what, a, b));
  if (a == 0) throw ArgumentError(fmt::format("{}: empty input", what));
}

}  // namespace

double brier(std::span<const double> probs, std::span<const double> labels) {
  check_lengths(probs.size(), labels.size(), "brier");
  return simd::sum_sq_diff(probs, labels) / static_cast<double>(probs.size());
}

double mnls_binary(std::span<const double> probs, std::span<const double> labels) {
  check_lengths(probs.size(), labels.size(), "mnls");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], log_score_eps, 1.0 - log_score_eps);
    sum += labels[i] != 0.0 ? std::log(p) : std::log1p(-p);
  }
  return -sum / static_cast<double>(probs.size());
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  check_lengths(scores.size(), labels.size(), "auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t)
      if (labels[order[t]] != 0.0) rank_sum += r;
    i = j + 1;
  }
  for (double y : labels) pos += y != 0.0 ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw ValidationError("AUC is undefined when labels contain a single class");
  const double np = static_cast<double>(pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(neg));
}

double rmse(std::span<const double> preds, std::span<const double> truth) {
  check_lengths(preds.size(), truth.size(), "rmse");
  return std::sqrt(simd::sum_sq_diff(preds, truth) / static_cast<double>(preds.size()));
}

double mae(std::span<const double> preds, std::span<const double> truth) {
  check_lengths(preds.size(), truth.size(), "mae");
  return simd::sum_abs_diff(preds, truth) / static_cast<double>(preds.size());
}

double mnls_gaussian(const std::vector<GaussianDist>& predictive, std::span<const double> truth) {
  check_lengths(predictive.size(), truth.size(), "mnls");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += predictive[i].log_pdf(truth[i]);
  return -sum / static_cast<double>(truth.size());
}

TTestResult nb_ttest(const std::vector<double>& diffs, double n_train, double n_test) {
  const std::size_t k = diffs.size();
  if (k < 2) throw ArgumentError("corrected t-test needs at least 2 differences");
  if (!(n_train > 0.0) || !(n_test > 0.0)) throw ArgumentError("corrected t-test needs positive train/test sizes");
  const double kd = static_cast<double>(k);
  const double sum = std::accumulate(diffs.begin(), diffs.end(), 0.0);
  const double mean = sum / kd;
  double ss = 0.0;
  for (double v : diffs) ss += (v - mean) * (v - mean);
  if (!(ss > 0.0)) return {0.0, 0.5, true};
  // t = mean / sqrt((1/k + n_test/n_train) * ss / (k-1)), rearranged to keep
  // divisions out of the centred sum; small integer inputs then stay exact.
  double kss = 0.0;
  for (double v : diffs) kss += (kd * v - sum) * (kd * v - sum);
  kss /= kd;
  TTestResult r;
  r.t_stat = sum * std::sqrt(kd - 1.0) / std::sqrt((1.0 + kd * n_test / n_train) * kss);
  const boost::math::students_t dist(kd - 1.0);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.t_stat));
  return r;
}

std::vector<MetricSpec> metrics_for(ResponseKind kind) {
  if (kind == ResponseKind::binary) return {{"brier", false}, {"mnls", false}, {"auc", true}};
  return {{"mnls", false}, {"rmse", false}, {"mae", false}};
}

const ModelResult& CVReport::model(const std::string& label) const {
  for (const auto& m : models)
    if (m.label == label) return m;
  std::vector<std::string> labels;
  for (const auto& m : models) labels.push_back(m.label);
  throw LookupError("no CV results for model '" + label + "'", labels);
}

const MetricResult& CVReport::metric(const std::string& model_label, const std::string& metric_name) const {
  const ModelResult& m = model(model_label);
  for (std::size_t i = 0; i < metrics.size(); ++i)
    if (metrics[i].name == metric_name) return m.metrics[i];
  throw LookupError("no metric '" + metric_name + "'", {});
}

const Comparison& CVReport::comparison(const std::string& model_label, const std::string& metric_name) const {
  for (const auto& c : comparisons)
    if (c.model == model_label && c.metric == metric_name) return c;
  throw LookupError("no comparison for '" + model_label + "' on '" + metric_name + "'", {});
}

namespace {

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fold), 0x6376u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::span<const double> row_of(const DesignMatrix& x, Eigen::Index i) {
  return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
}

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// One fold's scores: [model][metric].
using FoldScores = std::vector<std::vector<double>>;

std::vector<double> binary_scores(std::span<const double> probs, std::span<const double> y) {
  return {brier(probs, y), mnls_binary(probs, y), auc(probs, y)};
}

std::vector<double> gaussian_scores(const std::vector<GaussianDist>& pred, std::span<const double> y) {
  std::vector<double> means(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) means[i] = pred[i].mean();
  return {mnls_gaussian(pred, y), rmse(means, y), mae(means, y)};
}

FoldScores score_fold(const BoundDataset& data, const PriorCatalog& catalog, const FoldPlan& folds, int f,
                      const CVConfig& config) {
  const BoundDataset train = data.subset(folds.train_rows(f));
  const BoundDataset test = data.subset(folds.test_rows(f));
  const DesignMatrix& xt = test.design();
  const auto yt = as_span(test.response());
  const auto n = xt.rows();
  FoldScores scores;

  if (data.spec().response_kind == ResponseKind::binary) {
    const double positives = train.response().sum();
    if (positives == 0.0 || positives == static_cast<double>(train.n()))
      throw FoldError(f, fmt::format("fold {}: training labels contain a single class", f));
    if (test.response().sum() == 0.0 || test.response().sum() == static_cast<double>(n))
      throw FoldError(f, fmt::format("fold {}: test labels contain a single class, AUC undefined", f));

    const MLEFit mle = fit_logistic_mle(train, config.irls);
    std::vector<double> probs(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) probs[i] = sigmoid(simd::dot(row_of(xt, i), as_span(mle.coefficients)));
    scores.push_back(binary_scores(probs, yt));

    const std::uint64_t seed = fold_seed(config.seed, f);
    for (const auto& prior : catalog.sets) {
      const PosteriorFit post = posterior_logistic_laplace(train, prior, config.irls);
      const PosteriorSampler sampler(post, config.mc_draws, seed);
      for (Eigen::Index i = 0; i < n; ++i) probs[i] = sampler.predictive_binary(row_of(xt, i));
      scores.push_back(binary_scores(probs, yt));
    }
    return scores;
  }

  // Frequentist predictive: N(x'b, s2 + x' Cov x), the flat-prior limit of
  // the conjugate predictive.
  const MLEFit mle = fit_linear_mle(train);
  const double s2 = *mle.noise_variance;
  std::vector<GaussianDist> pred;
  pred.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Map<const Eigen::VectorXd> x(xt.data() + i * xt.cols(), xt.cols());
    pred.emplace_back(x.dot(mle.coefficients), std::sqrt(s2 + x.dot(mle.covariance * x)));
  }
  scores.push_back(gaussian_scores(pred, yt));
  for (const auto& prior : catalog.sets) {
    const PosteriorFit post = posterior_linear_conjugate(train, prior);
    pred.clear();
    for (Eigen::Index i = 0; i < n; ++i) pred.push_back(predictive_gaussian(post, row_of(xt, i)));
    scores.push_back(gaussian_scores(pred, yt));
  }
  return scores;
}

}  // namespace

CVReport run_cv(const BoundDataset& data, const PriorCatalog& catalog, const FoldPlan& folds, const CVConfig& config) {
  require_valid(catalog, data.spec());
  if (folds.k < 2) throw ArgumentError("cross-validation needs k >= 2");
  if (folds.assignments.size() != data.n())
    throw ArgumentError(fmt::format("fold plan covers {} rows, data has {}", folds.assignments.size(), data.n()));
  for (int a : folds.assignments)
    if (a < 0 || a >= folds.k) throw ArgumentError(fmt::format("fold assignment {} outside [0, {})", a, folds.k));
  for (int f = 0; f < folds.k; ++f)
    if (folds.fold_size(f) == 0) throw FoldError(f, fmt::format("fold {} is empty", f));
  if (config.mc_draws < 1) throw ArgumentError("mc_draws must be >= 1");

  const auto k = static_cast<std::size_t>(folds.k);
  std::vector<FoldScores> per_fold(k);
  parallel_for(k, [&](std::size_t f) { per_fold[f] = score_fold(data, catalog, folds, static_cast<int>(f), config); });

  CVReport report;
  report.metrics = metrics_for(data.spec().response_kind);
  report.folds = folds;
  report.seed = config.seed;
  report.mc_draws = config.mc_draws;
  const double n = static_cast<double>(data.n());
  report.n_test = n / static_cast<double>(k);
  report.n_train = n - report.n_test;

  std::vector<std::string> labels{frequentist_label};
  for (const auto& s : catalog.sets) labels.push_back(s.label);
  for (std::size_t m = 0; m < labels.size(); ++m) {
    ModelResult model{labels[m], {}};
    for (std::size_t q = 0; q < report.metrics.size(); ++q) {
      MetricResult r;
      for (std::size_t f = 0; f < k; ++f) r.per_fold.push_back(per_fold[f][m][q]);
      r.mean = std::accumulate(r.per_fold.begin(), r.per_fold.end(), 0.0) / static_cast<double>(k);
      model.metrics.push_back(std::move(r));
    }
    report.models.push_back(std::move(model));
  }

  const ModelResult& base = report.models.front();
  for (std::size_t m = 1; m < report.models.size(); ++m) {
    for (std::size_t q = 0; q < report.metrics.size(); ++q) {
      const double sign = report.metrics[q].higher_is_better ? 1.0 : -1.0;
      std::vector<double> diffs(k);
      for (std::size_t f = 0; f < k; ++f)
        diffs[f] = sign * (report.models[m].metrics[q].per_fold[f] - base.metrics[q].per_fold[f]);
      report.comparisons.push_back(
          {report.models[m].label, report.metrics[q].name, nb_ttest(diffs, report.n_train, report.n_test)});
    }
  }
  return report;
}

std::string format_cv_table(const CVReport& report) {
  const bool binary = report.metrics.size() == 3 && report.metrics[2].name == "auc";
  const int digits = binary ? 4 : 3;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Model"};
  for (const auto& m : report.metrics) {
    std::string name = m.name == "brier" ? "Brier" : m.name;
    if (name != "Brier") std::transform(name.begin(), name.end(), name.begin(), [](char c) { return std::toupper(c); });
    header.push_back(name + (m.higher_is_better ? " (higher better)" : " (lower better)"));
  }
  rows.push_back(std::move(header));
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    const auto& model = report.models[i];
    std::vector<std::string> row{model.label};
    for (std::size_t q = 0; q < report.metrics.size(); ++q) {
      std::string cell = fmt::format("{:.{}f}", model.metrics[q].mean, digits);
      if (i > 0) {
        const TTestResult& t = report.comparison(model.label, report.metrics[q].name).test;
        cell += t.degenerate ? " (p=0.50*)" : fmt::format(" (p={:.2f})", t.p_value);
      }
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::size_t total = width[0];
  for (std::size_t c = 1; c < width.size(); ++c) total += 2 + width[c];

  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += fmt::format("{:<{}}", rows[i][0], width[0]);
    for (std::size_t c = 1; c < rows[i].size(); ++c) out += fmt::format("  {:>{}}", rows[i][c], width[c]);
    out += "\n";
    if (i == 0) out += std::string(total, '-') + "\n";
  }
  out += fmt::format("{}-fold CV, seed {}; p-values: one-sided corrected t-test against {}", report.folds.k,
                     report.seed, frequentist_label);
  if (binary) out += fmt::format(", {} predictive draws", report.mc_draws);
  out += "\n";
  bool any_degenerate = false;
  for (const auto& c : report.comparisons) any_degenerate = any_degenerate || c.test.degenerate;
  if (any_degenerate) out += "* zero variance across folds; test degenerate\n";
  return out;
}

}  // namespace llmprior
