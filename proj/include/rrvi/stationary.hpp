#ifndef RRVI_STATIONARY_HPP
#define RRVI_STATIONARY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrvi/montecarlo.hpp"
#include "rrvi/problems.hpp"
#include "rrvi/types.hpp"

namespace rrvi {

/// The epoch map of an affine problem is x -> A x + b.
struct AffineMap {
  Matrix A;
  Vector b;
};

AffineMap epoch_affine_map(const FiniteSumProblem& problem, double gamma, const Permutation& perm);

/// Average of the epoch map over all n! permutations (n <= 8).
AffineMap mean_epoch_map(const FiniteSumProblem& problem, double gamma);

struct StationaryMean {
  Vector mean;
  double spectral_radius = 0.0;
  /// ||(I - Abar) m - bbar||
  double residual = 0.0;
  /// Non-empty when the request deserves a caveat.
  std::string warning;
};

/// Fixed point of the averaged epoch map, m = Abar m + bbar. The perturbation
/// is zero-mean and leaves m unchanged; `perturbed` only adds a warning.
StationaryMean stationary_mean_report(const FiniteSumProblem& problem, double gamma,
                                      bool perturbed = false);
Vector stationary_mean_exact(const FiniteSumProblem& problem, double gamma,
                             bool perturbed = false);

enum class BiasEstimator { ExactEnum, MonteCarlo };

const char* to_string(BiasEstimator e);
BiasEstimator bias_estimator_from_string(const std::string& name);

struct BiasCurve {
  BiasEstimator estimator = BiasEstimator::ExactEnum;
  std::vector<double> gammas;
  std::vector<double> bias_plain;
  std::vector<double> bias_extrap;
  /// Monte Carlo standard errors; empty for the exact path.
  std::vector<double> bias_plain_se;
  std::vector<double> bias_extrap_se;
  /// Log-log slopes over the points above the 1e-13 floor; absent when
  /// fewer than two points qualify.
  std::optional<double> slope_plain;
  std::optional<double> slope_extrap;
};

inline constexpr double kBiasFloor = 1e-13;

struct BiasCurveOptions {
  std::optional<Vector> x_star;
  /// Refuse step sizes with 2 gamma above the bias step-size bound.
  bool check_admissible = true;
  /// Chain settings for the Monte Carlo path (variant, perturbation, seed).
  RunConfig run;
  MonteCarloOptions monte_carlo;
};

BiasCurve bias_curve(const FiniteSumProblem& problem, std::span<const double> gammas,
                     BiasEstimator estimator, const BiasCurveOptions& options = {});

/// Least-squares log-log slope over the points with y above `floor`.
std::optional<double> floored_slope(std::span<const double> x, std::span<const double> y,
                                    double floor = kBiasFloor);

}  // namespace rrvi

#endif  // RRVI_STATIONARY_HPP
