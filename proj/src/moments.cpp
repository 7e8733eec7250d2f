#include "rrvi/moments.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "rrvi/errors.hpp"
#include "rrvi/samplers.hpp"

namespace rrvi {

namespace {

void check_sizes(std::span<const Vector> vectors, std::size_t k) {
  const std::size_t n = vectors.size();
  if (n == 0) throw ParameterError("fourth moment: empty vector set");
  if (k == 0 || k > n) {
    throw ParameterError("fourth moment: k must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                         ", n=" + std::to_string(n) + ")");
  }
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) {
      throw ParameterError("fourth moment: vectors have different dimensions");
    }
  }
}

std::vector<Vector> centered(std::span<const Vector> vectors) {
  Vector mean = Vector::Zero(vectors.front().size());
  for (const auto& v : vectors) mean += v;
  mean /= static_cast<double>(vectors.size());
  std::vector<Vector> r;
  r.reserve(vectors.size());
  for (const auto& v : vectors) r.push_back(v - mean);
  return r;
}

// (k)_m / (n)_m, zero once m exceeds k.
double falling_ratio(std::size_t k, std::size_t n, std::size_t m) {
  if (m > k) return 0.0;
  double r = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    r *= static_cast<double>(k - j) / static_cast<double>(n - j);
  }
  return r;
}

double binomial(std::size_t n, std::size_t k) {
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t j = 1; j <= k; ++j) c = c * static_cast<double>(n - k + j) / static_cast<double>(j);
  return c;
}

}  // namespace

PopulationSums population_sums(std::span<const Vector> vectors) {
  if (vectors.empty()) throw ParameterError("population sums: empty vector set");
  const auto r = centered(vectors);
  const std::size_t n = r.size();
  Matrix R(static_cast<Eigen::Index>(n), r.front().size());
  for (std::size_t i = 0; i < n; ++i) R.row(static_cast<Eigen::Index>(i)) = r[i].transpose();
  const Matrix G = R * R.transpose();
  PopulationSums s;
  double q = 0.0;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    q += G(i, i);
    s.S4 += G(i, i) * G(i, i);
  }
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      if (i == j) continue;
      s.U2 += G(i, i) * G(j, j);
      s.T2 += G(i, j) * G(i, j);
    }
  }
  s.trace_sigma_hat = q / static_cast<double>(n);
  return s;
}

MomentReport fourth_moment_exact(std::span<const Vector> vectors, std::size_t k) {
  check_sizes(vectors, k);
  const std::size_t n = vectors.size();
  const PopulationSums s = population_sums(vectors);
  MomentReport rep;
  rep.n = n;
  rep.k = k;
  rep.S4 = s.S4;
  rep.U2 = s.U2;
  rep.T2 = s.T2;
  rep.trace_sigma_hat = s.trace_sigma_hat;
  rep.brute = NAN;
  if (k == n) {
    rep.exact = 0.0;
  } else {
    // Expand ||sum_{i in S} r_i||^4 over ordered index tuples and group by the
    // number of distinct indices; sum_i r_i = 0 turns the off-diagonal sums
    // over distinct tuples into polynomials in S4, T2 and Q^2.
    const double q = static_cast<double>(n) * s.trace_sigma_hat;
    const double q2 = q * q;
    const double e1 = s.S4;
    const double e2 = s.U2 + 2.0 * s.T2 - 4.0 * s.S4;
    const double e3 = 8.0 * s.S4 - 2.0 * q2 - 4.0 * s.T2;
    const double e4 = q2 + 2.0 * s.T2 - 4.0 * s.S4;
    const double total = falling_ratio(k, n, 1) * e1 + falling_ratio(k, n, 2) * e2 +
                         falling_ratio(k, n, 3) * e3 + falling_ratio(k, n, 4) * e4;
    const double k4 = std::pow(static_cast<double>(k), 4);
    rep.exact = std::max(0.0, total / k4);
  }
  rep.bound = fourth_moment_bound(vectors, k);
  return rep;
}

double fourth_moment_bound(std::span<const Vector> vectors, std::size_t k) {
  check_sizes(vectors, k);
  const std::size_t n = vectors.size();
  const PopulationSums s = population_sums(vectors);
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  double value = kd / nd * s.S4;
  if (k >= 2) {
    const double u2 = nd * nd * s.trace_sigma_hat * s.trace_sigma_hat - s.S4;
    value += 9.0 * kd * (kd - 1.0) / (nd * (nd - 1.0)) * u2;
  }
  return value / std::pow(kd, 4);
}

double fourth_moment_bruteforce(std::span<const Vector> vectors, std::size_t k) {
  check_sizes(vectors, k);
  const std::size_t n = vectors.size();
  const double count = binomial(n, k);
  if (count > 1e6) {
    throw ParameterError("fourth_moment_bruteforce: C(n, k) = " + std::to_string(count) +
                         " exceeds the enumeration limit 1e6");
  }
  const auto r = centered(vectors);
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  Vector acc(r.front().size());
  double total = 0.0;
  while (true) {
    acc.setZero();
    for (auto i : idx) acc += r[i];
    const double sq = acc.squaredNorm() / (static_cast<double>(k) * static_cast<double>(k));
    total += sq * sq;
    // Next combination in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return total / count;
}

MomentReport fourth_moment_report(std::span<const Vector> vectors, std::size_t k,
                                  bool with_bruteforce) {
  MomentReport rep = fourth_moment_exact(vectors, k);
  if (with_bruteforce && binomial(vectors.size(), k) <= 1e6) {
    rep.brute = fourth_moment_bruteforce(vectors, k);
  }
  return rep;
}

ComponentBoundReport component_bound_check(const FiniteSumProblem& problem,
                                           const ProblemConstants& constants, std::size_t points,
                                           std::uint64_t seed) {
  const std::size_t n = problem.n();
  const auto d = static_cast<Eigen::Index>(problem.d());
  if (constants.L_i.size() != n) throw ParameterError("component_bound_check: L_i has wrong size");
  if (constants.x_star.size() != d) throw ParameterError("component_bound_check: x* missing");
  double l2 = 0.0, l4 = 0.0;
  for (double L : constants.L_i) {
    l2 += L * L;
    l4 += L * L * L * L;
  }
  l2 /= static_cast<double>(n);
  l4 /= static_cast<double>(n);

  ComponentBoundReport rep;
  rep.points = points;
  rep.min_monotone_ratio = INFINITY;
  std::vector<Vector> f(n, Vector(d));
  for (std::size_t p = 0; p < points; ++p) {
    CounterRng rng(seed, streams::kTrial, p);
    const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform01());
    const Vector x = constants.x_star + scale * normal_vector(rng, d);
    Vector mean = Vector::Zero(d);
    for (std::size_t i = 0; i < n; ++i) {
      problem.evaluate(i, x, f[i]);
      mean += f[i];
    }
    mean /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (f[i] - mean).squaredNorm();
      m2 += s;
      m4 += s * s;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    const double dist2 = (x - constants.x_star).squaredNorm();
    const double rhs2 = 2.0 * l2 * dist2 + 2.0 * constants.sigma_star_sq;
    const double rhs4 = 128.0 * l4 * dist2 * dist2 + 128.0 * constants.sigma_star_4;
    const double tol2 = 1e-12 * (1.0 + rhs2), tol4 = 1e-12 * (1.0 + rhs4);
    if (m2 > rhs2 + tol2) ++rep.violations_second;
    if (m4 > rhs4 + tol4) ++rep.violations_fourth;
    if (rhs2 > 0.0) rep.worst_ratio_second = std::max(rep.worst_ratio_second, m2 / rhs2);
    if (rhs4 > 0.0) rep.worst_ratio_fourth = std::max(rep.worst_ratio_fourth, m4 / rhs4);
    if (dist2 > 0.0) {
      const double ratio = mean.dot(x - constants.x_star) / dist2;
      rep.min_monotone_ratio = std::min(rep.min_monotone_ratio, ratio);
      if (ratio < constants.mu - 1e-9 * (1.0 + std::abs(constants.mu))) ++rep.violations_monotone;
    }
  }
  return rep;
}

}  // namespace rrvi
