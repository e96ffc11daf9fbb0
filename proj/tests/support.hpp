#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llmprior/dataset.hpp"
#include "llmprior/priors.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return LLMPRIOR_DATA_DIR; }

inline llmprior::ModelSpec heart_spec() { return llmprior::load_model_spec(data_dir() / "heart_spec.json"); }
inline llmprior::ModelSpec concrete_spec() { return llmprior::load_model_spec(data_dir() / "concrete_spec.json"); }

inline llmprior::BoundDataset heart_data() {
  return llmprior::load_csv(data_dir() / "heart_cleveland.csv", heart_spec());
}
inline llmprior::BoundDataset concrete_data() {
  return llmprior::load_csv(data_dir() / "concrete.csv", concrete_spec());
}

inline llmprior::ModelSpec toy_spec(int p, llmprior::ResponseKind kind, bool intercept = true) {
  llmprior::ModelSpec s;
  s.id = "toy";
  s.response_name = "y";
  s.response_kind = kind;
  s.intercept = intercept;
  for (int j = 0; j < p; ++j) s.predictors.push_back({"x" + std::to_string(j + 1), "predictor", ""});
  return s;
}

// Synthetic logistic data with known coefficients (intercept first).
inline llmprior::BoundDataset logistic_data(const Eigen::VectorXd& beta, int n, std::uint64_t seed) {
  const int p = static_cast<int>(beta.size()) - 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double eta = beta[0];
    for (int j = 0; j < p; ++j) {
      x(i, j) = z(rng);
      eta += beta[j + 1] * x(i, j);
    }
    y[i] = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return llmprior::make_dataset(toy_spec(p, llmprior::ResponseKind::binary), x, y);
}

inline llmprior::BoundDataset linear_data(const Eigen::VectorXd& beta, double noise_sd, int n, std::uint64_t seed) {
  const int p = static_cast<int>(beta.size()) - 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double mu = beta[0];
    for (int j = 0; j < p; ++j) {
      x(i, j) = z(rng);
      mu += beta[j + 1] * x(i, j);
    }
    y[i] = mu + noise_sd * z(rng);
  }
  return llmprior::make_dataset(toy_spec(p, llmprior::ResponseKind::continuous), x, y);
}

// Every coefficient of `spec` gets N(mean, sd).
inline llmprior::PriorSet uniform_prior(const llmprior::ModelSpec& spec, const std::string& label, double mean,
                                        double sd) {
  llmprior::PriorSet s;
  s.label = label;
  s.source = "test";
  s.informativeness = llmprior::Informativeness::custom;
  s.confidence_weight = 1.0;
  for (const auto& n : spec.coefficient_names()) s.entries[n] = {mean, sd, ""};
  return s;
}

// Composite Simpson rule with `intervals` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Upper-tail probability of Student t with `df` degrees of freedom, by
// Simpson integration of the density from 0 to |t|.
inline double student_t_sf(double t, double df) {
  const double logc = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * std::numbers::pi);
  auto pdf = [&](double x) { return std::exp(logc - (df + 1) / 2 * std::log1p(x * x / df)); };
  const double mass = simpson(pdf, 0.0, std::abs(t), 200000);
  return t >= 0 ? 0.5 - mass : 0.5 + mass;
}

// Central finite-difference gradient.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

// Normwise relative error |a - b|_inf / |b|_inf.
inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / b.lpNorm<Eigen::Infinity>();
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("llmprior_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support
