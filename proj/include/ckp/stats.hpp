#pragma once

#include <cstdint>
#include <vector>

namespace ckp {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 gives 95%).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
  std::uint64_t n = 0;
};
MeanSE mean_se(const std::vector<double>& values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::uint64_t n = 0;
  /// One-sided upper confidence bound on the slope (Student t, n - 2 dof).
  double slope_upper(double confidence) const;
  /// Two-sided interval on the slope.
  Interval slope_interval(double confidence) const;
};
/// Ordinary least squares y = intercept + slope * x; needs at least 3 points.
LinearFit ols(const std::vector<double>& x, const std::vector<double>& y);

/// Upper-tail probability of a chi-square statistic with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

/// E|X/n - q| for X ~ Binomial(n, q) (exact mean absolute deviation).
double binomial_mean_abs_deviation(std::uint64_t n, double q);

}  // namespace ckp
