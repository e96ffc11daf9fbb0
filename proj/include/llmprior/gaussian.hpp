#pragma once

namespace llmprior {

/// Univariate normal distribution N(mean, sd^2).
///
/// The constructor enforces a finite mean and a finite, strictly positive sd
/// and throws ArgumentError otherwise.
class GaussianDist {
 public:
  GaussianDist(double mean, double sd);

  double mean() const noexcept { return mean_; }
  double sd() const noexcept { return sd_; }
  double variance() const noexcept { return sd_ * sd_; }

  double pdf(double x) const noexcept;
  double log_pdf(double x) const noexcept;

  friend bool operator==(const GaussianDist&, const GaussianDist&) = default;

 private:
  double mean_;
  double sd_;
};

}  // namespace llmprior
