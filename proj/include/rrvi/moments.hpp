#ifndef RRVI_MOMENTS_HPP
#define RRVI_MOMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include "rrvi/problems.hpp"
#include "rrvi/types.hpp"

namespace rrvi {

/// Fourth moment of the mean of a uniformly random k-subset of n vectors,
/// E||Xbar_S - Xbar||^4, together with the population sums it is built from
/// (r_i = X_i - Xbar).
struct MomentReport {
  std::size_t n = 0;
  std::size_t k = 0;
  double exact = 0.0;
  double bound = 0.0;
  /// Enumeration value; NaN when it was not computed.
  double brute = 0.0;
  /// sum_i ||r_i||^4
  double S4 = 0.0;
  /// sum_{i != j} ||r_i||^2 ||r_j||^2
  double U2 = 0.0;
  /// sum_{i != j} (r_i' r_j)^2
  double T2 = 0.0;
  /// trace of the population covariance (1/n) sum_i r_i r_i'
  double trace_sigma_hat = 0.0;
};

struct PopulationSums {
  double S4 = 0.0;
  double U2 = 0.0;
  double T2 = 0.0;
  double trace_sigma_hat = 0.0;
};

PopulationSums population_sums(std::span<const Vector> vectors);

/// Closed form for E||Xbar_S - Xbar||^4 under sampling without replacement.
/// Fills every field except bound and brute.
MomentReport fourth_moment_exact(std::span<const Vector> vectors, std::size_t k);

/// (1/k^4) [ (k/n) S4 + 9 k(k-1)/(n(n-1)) (n^2 tr(Sigma)^2 - S4) ].
double fourth_moment_bound(std::span<const Vector> vectors, std::size_t k);

/// Average over all C(n, k) subsets. Refuses when C(n, k) > 1e6.
double fourth_moment_bruteforce(std::span<const Vector> vectors, std::size_t k);

/// Exact, bound and (when C(n, k) is small enough) brute-force values.
MomentReport fourth_moment_report(std::span<const Vector> vectors, std::size_t k,
                                  bool with_bruteforce = true);

/// Component-variance bounds at random points x = x* + s z with z standard
/// normal and log10(s) uniform in [-2, 2]:
///   (i)  (1/n) sum ||F_i(x) - F(x)||^2 <= (2/n) sum L_i^2 ||x - x*||^2 + 2 sigma*^2
///   (ii) (1/n) sum ||F_i(x) - F(x)||^4 <= (128/n) sum L_i^4 ||x - x*||^4 + 128 sigma*^4
/// plus quasi-strong monotonicity <F(x), x - x*> >= (mu - tol) ||x - x*||^2.
struct ComponentBoundReport {
  std::size_t points = 0;
  std::size_t violations_second = 0;
  std::size_t violations_fourth = 0;
  std::size_t violations_monotone = 0;
  /// Largest observed lhs / rhs for (i) and (ii).
  double worst_ratio_second = 0.0;
  double worst_ratio_fourth = 0.0;
  /// Smallest observed <F(x), x - x*> / ||x - x*||^2.
  double min_monotone_ratio = 0.0;
  bool holds() const {
    return violations_second == 0 && violations_fourth == 0 && violations_monotone == 0;
  }
};

ComponentBoundReport component_bound_check(const FiniteSumProblem& problem,
                                           const ProblemConstants& constants, std::size_t points,
                                           std::uint64_t seed);

}  // namespace rrvi

#endif  // RRVI_MOMENTS_HPP
