#pragma once

#include <span>
#include <vector>

namespace bdd::stats {

double normal_cdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step against erfc; accurate to ~1e-15 on (0, 1).
double normal_quantile(double p);

/// Two-sided Gaussian critical value z_{1 - alpha/2}.
inline double normal_critical(double alpha) { return normal_quantile(1.0 - alpha / 2.0); }

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased

/// Order-statistic quantile: the ceil(prob * n)-th smallest value.
double upper_quantile(std::vector<double> values, double prob);

/// Ordinary least squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace bdd::stats
