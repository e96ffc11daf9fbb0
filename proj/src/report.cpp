#include "llmprior/report.hpp"

#include <algorithm>

#include "llmprior/errors.hpp"

namespace llmprior {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

json marginals(const std::vector<std::string>& names, const std::vector<GaussianDist>& dists) {
  json out = json::array();
  for (std::size_t i = 0; i < dists.size(); ++i)
    out.push_back({{"name", i < names.size() ? names[i] : ""}, {"mean", dists[i].mean()}, {"sd", dists[i].sd()}});
  return out;
}

}  // namespace

json to_json(const MLEFit& fit) {
  json j = {{"names", fit.names},
            {"coefficients", vec(fit.coefficients)},
            {"covariance", mat(fit.covariance)},
            {"marginals", marginals(fit.names, fit.marginals)},
            {"loglik", fit.loglik},
            {"iterations", fit.iterations},
            {"converged", fit.converged}};
  if (fit.noise_variance) j["noise_variance"] = *fit.noise_variance;
  return j;
}

json to_json(const BootstrapResult& boot, const std::vector<std::string>& names) {
  return {{"requested", boot.requested},
          {"skipped", boot.skipped},
          {"successful", boot.replicates.size()},
          {"summary", marginals(names, boot.summary)}};
}

json to_json(const PosteriorFit& fit) {
  json j = {{"method", to_string(fit.method)},
            {"prior_label", fit.prior_label},
            {"names", fit.names},
            {"mode", vec(fit.mode)},
            {"covariance", mat(fit.covariance)},
            {"marginals", marginals(fit.names, fit.marginals)},
            {"iterations", fit.iterations}};
  if (fit.noise_variance) {
    j["noise_variance"] = *fit.noise_variance;
    j["noise_variance_treatment"] = "plug-in OLS estimate RSS/(n-d), not integrated over";
  }
  return j;
}

json to_json(const KLReport& r) {
  json columns = json::array();
  for (std::size_t c = 0; c < r.labels.size(); ++c)
    columns.push_back({{"label", r.labels[c]},
                       {"source", r.sources[c]},
                       {"informativeness", to_string(r.informativeness[c])},
                       {"average_kl", r.averages[c]},
                       {"average_rank", r.avg_ranks[c]}});
  json rows = json::array();
  for (std::size_t i = 0; i < r.coefficients.size(); ++i) {
    json values = json::object();
    for (std::size_t c = 0; c < r.labels.size(); ++c) values[r.labels[c]] = r.values[i][c];
    rows.push_back({{"coefficient", r.coefficients[i]}, {"kl", values}});
  }
  return {{"units", "nats"}, {"mle_method", r.mle_method}, {"columns", columns}, {"rows", rows}};
}

json to_json(const CVReport& r) {
  json metrics = json::array();
  for (const auto& m : r.metrics) metrics.push_back({{"name", m.name}, {"higher_is_better", m.higher_is_better}});
  json models = json::array();
  for (const auto& model : r.models) {
    json scores = json::object();
    for (std::size_t q = 0; q < r.metrics.size(); ++q)
      scores[r.metrics[q].name] = {{"per_fold", model.metrics[q].per_fold}, {"mean", model.metrics[q].mean}};
    models.push_back({{"label", model.label}, {"metrics", scores}});
  }
  json comparisons = json::array();
  for (const auto& c : r.comparisons)
    comparisons.push_back({{"model", c.model},
                           {"metric", c.metric},
                           {"t_stat", c.test.t_stat},
                           {"p_value", c.test.p_value},
                           {"degenerate", c.test.degenerate}});
  return {{"seed", r.seed},
          {"mc_draws", r.mc_draws},
          {"folds",
           {{"k", r.folds.k}, {"seed", r.folds.seed}, {"stratified", r.folds.stratified},
            {"assignments", r.folds.assignments}}},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"metrics", metrics},
          {"models", models},
          {"comparisons", comparisons}};
}

json to_json(const PredictiveSummary& s) {
  return {{"mean", s.mean}, {"sd", s.sd},   {"q025", s.q025}, {"q25", s.q25},
          {"q50", s.q50},   {"q75", s.q75}, {"q975", s.q975}};
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) throw ArgumentError("a grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

json density_curves(const std::vector<std::string>& coefficients, const std::vector<CurveSource>& sources,
                    int points) {
  for (const auto& s : sources)
    if (s.marginals.size() != coefficients.size())
      throw ArgumentError("curve source '" + s.label + "' has the wrong number of marginals");
  json out = json::array();
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (sources.empty()) break;
    double lo_mean = sources.front().marginals[i].mean(), hi_mean = lo_mean, max_sd = 0.0;
    for (const auto& s : sources) {
      const GaussianDist& d = s.marginals[i];
      lo_mean = std::min(lo_mean, d.mean());
      hi_mean = std::max(hi_mean, d.mean());
      max_sd = std::max(max_sd, d.sd());
    }
    const auto grid = linspace(lo_mean - 4.0 * max_sd, hi_mean + 4.0 * max_sd, points);
    json curves = json::array();
    for (const auto& s : sources) {
      const GaussianDist& d = s.marginals[i];
      std::vector<double> dens(grid.size());
      std::transform(grid.begin(), grid.end(), dens.begin(), [&](double x) { return d.pdf(x); });
      const auto own = linspace(d.mean() - 4.0 * d.sd(), d.mean() + 4.0 * d.sd(), points);
      std::vector<double> own_dens(own.size());
      std::transform(own.begin(), own.end(), own_dens.begin(), [&](double x) { return d.pdf(x); });
      curves.push_back({{"label", s.label},
                        {"kind", s.kind},
                        {"mean", d.mean()},
                        {"sd", d.sd()},
                        {"density", dens},
                        {"own_grid", own},
                        {"own_density", own_dens}});
    }
    out.push_back({{"coefficient", coefficients[i]}, {"grid", grid}, {"curves", curves}});
  }
  return out;
}

}  // namespace llmprior
