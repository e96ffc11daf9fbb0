#include "llmprior/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "llmprior/errors.hpp"

namespace llmprior {

GaussianDist::GaussianDist(double mean, double sd) : mean_(mean), sd_(sd) {
  if (!std::isfinite(mean)) throw ArgumentError("GaussianDist: mean must be finite");
  if (!std::isfinite(sd) || !(sd > 0.0))
    throw ArgumentError("GaussianDist: sd must be finite and > 0, got " + std::to_string(sd));
}

double GaussianDist::log_pdf(double x) const noexcept {
  const double z = (x - mean_) / sd_;
  return -0.5 * z * z - std::log(sd_) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double GaussianDist::pdf(double x) const noexcept { return std::exp(log_pdf(x)); }

}  // namespace llmprior
