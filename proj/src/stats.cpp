#include "ckp/stats.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ckp/error.hpp"

namespace ckp {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw Error("wilson_interval: no trials");
  const double n = static_cast<double>(trials);
  const double f = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (f + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(f * (1 - f) / n + z2 / (4 * n * n));
  Interval out{centre - half, centre + half};
  // Exact endpoints at the boundaries (rounding would otherwise leave +-1e-17).
  if (successes == 0) out.low = 0.0;
  if (successes == trials) out.high = 1.0;
  return out;
}

MeanSE mean_se(const std::vector<double>& values) {
  MeanSE out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) return out;
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(out.n - 1) / static_cast<double>(out.n));
  return out;
}

LinearFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw Error("ols: need at least 3 paired points");
  LinearFit fit;
  fit.n = x.size();
  const double n = static_cast<double>(fit.n);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw Error("ols: x values are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.slope_se = std::sqrt(rss / (n - 2) / sxx);
  return fit;
}

double LinearFit::slope_upper(double confidence) const {
  const boost::math::students_t dist(static_cast<double>(n - 2));
  return slope + boost::math::quantile(dist, confidence) * slope_se;
}

Interval LinearFit::slope_interval(double confidence) const {
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double q = boost::math::quantile(dist, 0.5 + confidence / 2);
  return {slope - q * slope_se, slope + q * slope_se};
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double binomial_mean_abs_deviation(std::uint64_t n, double q) {
  if (n == 0 || q <= 0 || q >= 1) return 0.0;
  // De Moivre: E|X - nq| = 2 m C(n, m) q^m (1-q)^(n-m+1), m = floor(nq) + 1.
  const double nd = static_cast<double>(n);
  const auto m = static_cast<std::uint64_t>(std::floor(nd * q)) + 1;
  if (m > n) return 0.0;
  const double md = static_cast<double>(m);
  const double log_term = std::lgamma(nd + 1) - std::lgamma(md + 1) - std::lgamma(nd - md + 1) +
                          md * std::log(q) + (nd - md + 1) * std::log1p(-q);
  return 2 * md * std::exp(log_term) / nd;
}

}  // namespace ckp
