#include "rrvi/stats.hpp"

#include <algorithm>
#include <cmath>

#include "rrvi/errors.hpp"

namespace rrvi {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("fit_line: x and y differ in length");
  if (x.size() < 2) throw ParameterError("fit_line: need at least two points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return f;
}

LineFit fit_loglog(std::span<const std::pair<double, double>> points) {
  std::vector<double> lx, ly;
  lx.reserve(points.size());
  ly.reserve(points.size());
  for (const auto& [px, py] : points) {
    if (!(px > 0.0) || !(py > 0.0)) {
      throw ParameterError("fit_loglog_slope: coordinates must be strictly positive");
    }
    lx.push_back(std::log(px));
    ly.push_back(std::log(py));
  }
  return fit_line(lx, ly);
}

double fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  return fit_loglog(points).slope;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw ParameterError("mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double standard_error(std::span<const double> v) {
  if (v.empty()) throw ParameterError("standard error of an empty sample");
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ParameterError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("quantile level must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double interquartile_range(std::span<const double> v) {
  std::vector<double> copy(v.begin(), v.end());
  return quantile(copy, 0.75) - quantile(copy, 0.25);
}

namespace {

std::pair<double, double> central_moments(std::span<const double> v, int a, int b) {
  const double m = mean(v);
  double sa = 0.0, sb = 0.0;
  for (double x : v) {
    sa += std::pow(x - m, a);
    sb += std::pow(x - m, b);
  }
  const auto n = static_cast<double>(v.size());
  return {sa / n, sb / n};
}

}  // namespace

double skewness(std::span<const double> v) {
  const auto [m2, m3] = central_moments(v, 2, 3);
  if (m2 == 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> v) {
  const auto [m2, m4] = central_moments(v, 2, 4);
  if (m2 == 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

}  // namespace rrvi
