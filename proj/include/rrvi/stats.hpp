#ifndef RRVI_STATS_HPP
#define RRVI_STATS_HPP

#include <span>
#include <utility>
#include <vector>

namespace rrvi {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope from the OLS residuals (0 with two points).
  double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// OLS slope of log y on log x. All coordinates must be strictly positive.
double fit_loglog_slope(std::span<const std::pair<double, double>> points);
LineFit fit_loglog(std::span<const std::pair<double, double>> points);

double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);
double standard_error(std::span<const double> v);
/// Linear-interpolation quantile (the "type 7" definition).
double quantile(std::vector<double> v, double p);
double interquartile_range(std::span<const double> v);
/// Moment-based skewness m3 / m2^(3/2).
double skewness(std::span<const double> v);
/// Moment-based excess kurtosis m4 / m2^2 - 3.
double excess_kurtosis(std::span<const double> v);

}  // namespace rrvi

#endif  // RRVI_STATS_HPP
