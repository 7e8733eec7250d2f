#ifndef RRVI_MONTECARLO_HPP
#define RRVI_MONTECARLO_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrvi/problems.hpp"
#include "rrvi/solver.hpp"
#include "rrvi/types.hpp"

namespace rrvi {

enum class ObservableKind { GameValue, Coordinate, SquaredDistance, Distance };
/// Growth of |l(x)| in ||x||. The ergodic-decay estimator accepts only
/// linear growth; the CLT harness accepts both.
enum class GrowthClass { Linear, Quadratic };

const char* to_string(ObservableKind kind);
ObservableKind observable_kind_from_string(const std::string& name);

struct Observable {
  ObservableKind kind = ObservableKind::GameValue;
  GrowthClass growth = GrowthClass::Quadratic;
  std::size_t index = 0;
  std::function<double(const Vector&)> fn;

  double operator()(const Vector& x) const { return fn(x); }
};

/// Built-in test functions. `index` selects the coordinate for Coordinate.
Observable make_observable(ObservableKind kind, const FiniteSumProblem& problem,
                           const Vector& x_star, std::size_t index = 0);

/// Shared settings of the Monte Carlo estimators.
struct MonteCarloOptions {
  /// Independent chains per estimate.
  std::size_t seeds = 20;
  /// Worker cap; 0 means one per hardware thread.
  unsigned threads = 0;
  /// Burn-in of ceil(burn_in_factor / (gamma n mu)) epochs.
  double burn_in_factor = 5.0;
  /// The averaging window is max(burn-in, min_window) epochs.
  std::size_t min_window = 500;
  /// Raise NotConvergedError when the two halves of the window differ by
  /// more than 5% and by more than three standard errors.
  bool check_convergence = true;
  /// mu for the burn-in; computed from the mean matrix when absent.
  std::optional<double> mu;
  /// Reference solution; exact_solution() when absent.
  std::optional<Vector> x_star;
};

struct PlateauEstimate {
  double gamma = 0.0;
  int power = 2;
  /// Mean over seeds of the window average of ||x_k - x*||^power.
  double value = 0.0;
  double std_error = 0.0;
  /// (second-half mean - first-half mean) / value.
  double trend = 0.0;
  std::size_t burn_in = 0;
  std::size_t window = 0;
};

/// Window averages of ||x_k - x*||^power for each gamma. Chains start at
/// config.x0 (x* when empty) and use config.variant, config.perturb, etc.
std::vector<PlateauEstimate> moment_plateau(const FiniteSumProblem& problem,
                                            const RunConfig& config,
                                            std::span<const double> gammas, int power,
                                            const MonteCarloOptions& options = {});
std::vector<PlateauEstimate> mse_plateau(const FiniteSumProblem& problem, const RunConfig& config,
                                         std::span<const double> gammas,
                                         const MonteCarloOptions& options = {});
std::vector<PlateauEstimate> fourth_plateau(const FiniteSumProblem& problem,
                                            const RunConfig& config,
                                            std::span<const double> gammas,
                                            const MonteCarloOptions& options = {});

/// Long-run mean of the epoch iterates of one chain pair, for bias
/// estimation. `mean_gamma` averages the gamma chain, `mean_extrap` the
/// extrapolated output 2 x^gamma - x^{2 gamma}; `per_seed_*` keep the
/// individual window means.
struct TailMeanEstimate {
  double gamma = 0.0;
  Vector mean_gamma;
  Vector mean_extrap;
  std::vector<Vector> per_seed_gamma;
  std::vector<Vector> per_seed_extrap;
  std::size_t burn_in = 0;
  std::size_t window = 0;
};

/// Runs config.variant forced to its extrapolated form (coupled chains) so
/// that both the plain and the extrapolated means come from one simulation.
TailMeanEstimate tail_mean_estimate(const FiniteSumProblem& problem, const RunConfig& config,
                                    const MonteCarloOptions& options = {});

struct CltSample {
  std::size_t T = 0;
  std::size_t trials = 0;
  double gamma = 0.0;
  /// Centering constant: mean of l over every recorded epoch of every trial.
  double pooled_mean = 0.0;
  /// T^{-1/2} sum_t (l(x_t) - pooled_mean), one per trial.
  std::vector<double> normalized_sums;
  /// T^{-1} sum_t l(x_t), one per trial.
  std::vector<double> averaged_values;
};

struct CltOptions {
  /// Stationarity burn-in of ceil(burn_in_factor / (gamma n mu)) epochs; 0
  /// skips it.
  double burn_in_factor = 5.0;
  /// Extra burn-in as a fraction of T before recording.
  double burn_in_fraction = 0.1;
  /// mu for the burn-in; computed from the mean matrix when absent.
  std::optional<double> mu;
  unsigned threads = 0;
};

/// Each trial starts from config.x0 (x* when empty), runs the stationarity
/// burn-in plus ceil(0.1 T) epochs, then records l at T consecutive epochs.
CltSample clt_harness(const FiniteSumProblem& problem, const RunConfig& config,
                      const Observable& observable, std::size_t T, std::size_t trials,
                      const CltOptions& options = {});

/// One sample per horizon in `Ts` from shared chains: every trial is burned
/// in once (extra fraction taken of the largest T) and the horizons are
/// prefixes of the same recorded stretch.
std::vector<CltSample> clt_series(const FiniteSumProblem& problem, const RunConfig& config,
                                  const Observable& observable, std::span<const std::size_t> Ts,
                                  std::size_t trials, const CltOptions& options = {});

struct ErgodicDecay {
  /// |E l(x_k) - pi(l)| estimates for k = 0..K.
  std::vector<double> deviation;
  std::vector<double> deviation_se;
  double stationary_mean = 0.0;
  double stationary_se = 0.0;
  /// Fitted per-epoch geometric factor; NaN when fewer than three leading
  /// deviations stand out of the noise.
  double rate = 0.0;
  double rate_se = 0.0;
  std::size_t fit_points = 0;
};

struct ErgodicOptions {
  unsigned threads = 0;
  double burn_in_factor = 5.0;
  std::optional<double> mu;
  /// Significance (in standard errors) a deviation needs to enter the fit.
  double fit_threshold = 3.0;
  /// Epochs each trial runs from config.x0 before epoch 0 is recorded; a
  /// long warm start draws the recorded start from the stationary law.
  std::size_t warm_start = 0;
};

/// Marginal means of l(x_k) from config.x0 (the origin when empty) over
/// `trials` chains, against the pooled tail mean of the same chains after a
/// further burn-in.
ErgodicDecay ergodic_decay(const FiniteSumProblem& problem, const RunConfig& config,
                           const Observable& observable, std::size_t K, std::size_t trials,
                           const ErgodicOptions& options = {});

/// One-epoch energy drift E[V(x_1) | x_0 = x] <= c1 V(x) + c2 with
/// V(x) = ||x - x*||^2 + 1, c1 = 1 - gamma n mu / 2 and
/// c2 = gamma n mu / 2 + 8 n gamma^2 L_max^2 sigma*^2 / mu^2 + 8 lambda / mu.
struct DriftState {
  double energy = 0.0;
  double mean_next = 0.0;
  double se_next = 0.0;
  double bound = 0.0;
  bool holds = false;
};

struct DriftReport {
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<DriftState> states;
  bool holds() const;
};

DriftReport drift_check(const FiniteSumProblem& problem, const RunConfig& config,
                        const ProblemConstants& constants, std::span<const Vector> states,
                        std::size_t samples, unsigned threads = 0);

}  // namespace rrvi

#endif  // RRVI_MONTECARLO_HPP
