#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "llmprior/bayes.hpp"
#include "llmprior/cv.hpp"
#include "llmprior/eval.hpp"
#include "llmprior/gaussian.hpp"
#include "llmprior/glm.hpp"

namespace llmprior {

nlohmann::json to_json(const MLEFit& fit);
nlohmann::json to_json(const BootstrapResult& boot, const std::vector<std::string>& names);
nlohmann::json to_json(const PosteriorFit& fit);
nlohmann::json to_json(const KLReport& report);
nlohmann::json to_json(const CVReport& report);
nlohmann::json to_json(const PredictiveSummary& summary);

/// One family of per-coefficient marginals to draw (an MLE, a prior set, a
/// posterior).
struct CurveSource {
  std::string label;
  std::string kind;  // "mle", "prior", "posterior"
  std::vector<GaussianDist> marginals;
};

inline constexpr int curve_points = 512;

/// Density curves per coefficient. Every source is evaluated on a shared grid
/// spanning [min mean - 4 max sd, max mean + 4 max sd], and also on its own
/// mean +- 4 sd grid so narrow curves stay resolved next to wide ones.
nlohmann::json density_curves(const std::vector<std::string>& coefficients, const std::vector<CurveSource>& sources,
                              int points = curve_points);

/// Evenly spaced grid including both endpoints.
std::vector<double> linspace(double lo, double hi, int points);

}  // namespace llmprior
