#include "llmprior/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "llmprior/errors.hpp"

namespace llmprior {

double kl_gaussian(double mle_mean, double mle_sd, double prior_mean, double prior_sd) {
  if (!std::isfinite(mle_mean) || !std::isfinite(mle_sd) || !std::isfinite(prior_mean) || !std::isfinite(prior_sd))
    throw ArgumentError("kl_gaussian: non-finite input");
  if (!(mle_sd > 0.0) || !(prior_sd > 0.0)) throw ArgumentError("kl_gaussian: standard deviations must be > 0");
  const double delta = mle_mean - prior_mean;
  const double r = mle_sd / prior_sd;
  // log(sp/sm) + (sm^2 + delta^2) / (2 sp^2) - 1/2
  return -std::log(r) + 0.5 * (r * r - 1.0) + 0.5 * (delta / prior_sd) * (delta / prior_sd);
}

double kl_gaussian(const GaussianDist& mle, const GaussianDist& prior) {
  return kl_gaussian(mle.mean(), mle.sd(), prior.mean(), prior.sd());
}

namespace {

std::size_t column_of(const KLReport& r, const std::string& label) {
  auto it = std::find(r.labels.begin(), r.labels.end(), label);
  if (it == r.labels.end()) throw LookupError("no KL column '" + label + "'", r.labels);
  return static_cast<std::size_t>(it - r.labels.begin());
}

}  // namespace

double KLReport::at(const std::string& coefficient, const std::string& label) const {
  auto it = std::find(coefficients.begin(), coefficients.end(), coefficient);
  if (it == coefficients.end()) throw LookupError("no KL row '" + coefficient + "'", coefficients);
  return values[static_cast<std::size_t>(it - coefficients.begin())][column_of(*this, label)];
}

double KLReport::average(const std::string& label) const { return averages[column_of(*this, label)]; }
double KLReport::avg_rank(const std::string& label) const { return avg_ranks[column_of(*this, label)]; }

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t m = values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(m);
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

KLReport kl_table(const std::vector<GaussianDist>& mle_marginals, const PriorCatalog& catalog, const ModelSpec& spec,
                  const std::string& mle_method) {
  require_valid(catalog, spec);
  const auto names = spec.coefficient_names();
  if (mle_marginals.size() != names.size())
    throw ArgumentError(fmt::format("expected {} MLE marginals, got {}", names.size(), mle_marginals.size()));
  if (catalog.sets.empty()) throw ArgumentError("catalog has no prior sets");

  std::vector<const PriorSet*> cols;
  for (const auto& s : catalog.sets) cols.push_back(&s);
  std::stable_sort(cols.begin(), cols.end(), [](const PriorSet* a, const PriorSet* b) {
    if (a->informativeness != b->informativeness) return a->informativeness < b->informativeness;
    if (a->source != b->source) return a->source < b->source;
    return a->label < b->label;
  });

  KLReport r;
  r.mle_method = mle_method;
  for (const PriorSet* s : cols) {
    r.labels.push_back(s->label);
    r.sources.push_back(s->source);
    r.informativeness.push_back(s->informativeness);
  }
  const std::size_t m = cols.size();
  std::vector<double> rank_sum(m, 0.0);
  r.averages.assign(m, 0.0);
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (spec.intercept && j == 0) continue;
    std::vector<double> row(m);
    for (std::size_t c = 0; c < m; ++c) {
      const PriorEntry& e = cols[c]->entry(names[j]);
      row[c] = kl_gaussian(mle_marginals[j].mean(), mle_marginals[j].sd(), e.mean, e.sd);
    }
    const auto ranks = average_ranks(row);
    for (std::size_t c = 0; c < m; ++c) {
      r.averages[c] += row[c];
      rank_sum[c] += ranks[c];
    }
    r.coefficients.push_back(names[j]);
    r.values.push_back(std::move(row));
  }
  const double rows = static_cast<double>(r.coefficients.size());
  r.avg_ranks.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    r.averages[c] = rows > 0 ? r.averages[c] / rows : 0.0;
    r.avg_ranks[c] = rows > 0 ? rank_sum[c] / rows : 1.0;
  }
  return r;
}

KLReport kl_table(const MLEFit& mle, const PriorCatalog& catalog, const ModelSpec& spec) {
  return kl_table(mle.marginals, catalog, spec, "fisher");
}

namespace {

std::string short_level(Informativeness level) {
  switch (level) {
    case Informativeness::moderate:
      return "Mod.";
    case Informativeness::weak:
      return "Weak";
    case Informativeness::custom:
      return "Custom";
  }
  return "Custom";
}

}  // namespace

std::string format_kl_table(const KLReport& report) {
  const std::size_t m = report.labels.size();
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Prior"});
  rows.push_back({"Source"});
  rows.push_back({"Informative"});
  for (std::size_t c = 0; c < m; ++c) {
    rows[0].push_back(report.labels[c]);
    rows[1].push_back(report.sources[c]);
    rows[2].push_back(short_level(report.informativeness[c]));
  }
  for (std::size_t i = 0; i < report.coefficients.size(); ++i) {
    std::vector<std::string> row{report.coefficients[i]};
    for (double v : report.values[i]) row.push_back(fmt::format("{:.2f}", v));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> avg{"Avg KL Div."}, rank{"Avg Rank"};
  for (std::size_t c = 0; c < m; ++c) {
    avg.push_back(fmt::format("{:.2f}", report.averages[c]));
    rank.push_back(fmt::format("{:.2f}", report.avg_ranks[c]));
  }
  const std::size_t header_rows = 3;
  const std::size_t body_end = rows.size();
  rows.push_back(std::move(avg));
  rows.push_back(std::move(rank));

  std::vector<std::size_t> width(m + 1, 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::size_t total = width[0];
  for (std::size_t c = 1; c <= m; ++c) total += 2 + width[c];
  const std::string rule(total, '-');

  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == header_rows || i == body_end) out += rule + "\n";
    out += fmt::format("{:<{}}", rows[i][0], width[0]);
    for (std::size_t c = 1; c <= m; ++c) out += fmt::format("  {:>{}}", rows[i][c], width[c]);
    out += "\n";
  }
  out += fmt::format("(KL divergence in nats; MLE sds from {})\n", report.mle_method);
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile of empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile level must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

PriorPredictive prior_predictive_sample(const ModelSpec& spec, const PriorSet& prior, const DesignMatrix& design,
                                        int reps, std::uint64_t seed, std::optional<double> noise_sd) {
  const auto report = validate_prior_set(prior, spec);
  if (!report.empty()) throw ValidationError("prior set '" + prior.label + "': " + report.front().message);
  if (reps < 1) throw ArgumentError("prior predictive needs reps >= 1");
  const auto names = spec.coefficient_names();
  if (static_cast<std::size_t>(design.cols()) != names.size())
    throw ArgumentError(fmt::format("design has {} columns, model has {} coefficients", design.cols(), names.size()));
  const bool linear = spec.response_kind == ResponseKind::continuous;
  if (linear && !noise_sd) throw ArgumentError("linear prior predictive requires a noise sd");
  if (noise_sd && !(std::isfinite(*noise_sd) && *noise_sd >= 0.0))
    throw ArgumentError("noise sd must be finite and >= 0");

  const auto d = design.cols();
  const auto n = design.rows();
  Eigen::VectorXd mean(d), sd(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const PriorEntry& e = prior.entry(names[static_cast<std::size_t>(j)]);
    mean[j] = e.mean;
    sd[j] = e.sd;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  PriorPredictive out;
  out.samples.resize(reps, n);
  Eigen::VectorXd theta(d);
  for (int r = 0; r < reps; ++r) {
    for (Eigen::Index j = 0; j < d; ++j) theta[j] = mean[j] + sd[j] * normal(rng);
    const Eigen::VectorXd eta = design * theta;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (linear)
        out.samples(r, i) = eta[i] + *noise_sd * normal(rng);
      else
        out.samples(r, i) = unif(rng) < sigmoid(eta[i]) ? 1.0 : 0.0;
    }
  }

  std::vector<double> all(out.samples.data(), out.samples.data() + out.samples.size());
  const double count = static_cast<double>(all.size());
  const double mu = std::accumulate(all.begin(), all.end(), 0.0) / count;
  double ss = 0.0;
  for (double v : all) ss += (v - mu) * (v - mu);
  auto& s = out.summary;
  s.mean = mu;
  s.sd = all.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  std::sort(all.begin(), all.end());
  s.q025 = quantile(all, 0.025);
  s.q25 = quantile(all, 0.25);
  s.q50 = quantile(all, 0.5);
  s.q75 = quantile(all, 0.75);
  s.q975 = quantile(all, 0.975);
  return out;
}

}  // namespace llmprior
