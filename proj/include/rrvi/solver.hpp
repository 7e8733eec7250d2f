#ifndef RRVI_SOLVER_HPP
#define RRVI_SOLVER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rrvi/problems.hpp"
#include "rrvi/samplers.hpp"
#include "rrvi/types.hpp"

namespace rrvi {

enum class BaseMethod { SGDA, SEG, OMD };
enum class Variant { Plain, RRresh, RRrom, RRromRRresh };

/// How the gamma and 2*gamma chains of an extrapolated run are executed.
/// Lockstep advances both chains inside one loop so that each component is
/// loaded once per step for both chains; it needs coupled index streams.
enum class ChainExecution { Sequential, Threads, Lockstep };

const char* to_string(BaseMethod m);
const char* to_string(Variant v);
const char* to_string(ChainExecution e);
BaseMethod base_method_from_string(const std::string& name);
Variant variant_from_string(const std::string& name);
ChainExecution chain_execution_from_string(const std::string& name);

bool is_extrapolated(Variant v);
bool is_reshuffled(Variant v);

struct RunConfig {
  double gamma = 1e-3;
  std::size_t epochs = 100;
  /// Add the calibrated Gaussian perturbation with covariance
  /// noise_scale * gamma^2 n^2 sigma*^2 / d * I once per epoch.
  bool perturb = false;
  double noise_scale = 1.0;
  /// Spread the perturbation over the inner steps instead (variance
  /// noise_scale * gamma^2 n sigma*^2 / d per step and coordinate).
  bool inner_noise = false;
  BaseMethod base_method = BaseMethod::SGDA;
  Variant variant = Variant::RRresh;
  bool record_inner = false;
  /// Starting point; empty means the origin.
  Vector x0;
  std::uint64_t seed = 0;
  /// Epochs excluded from the averaged extrapolation.
  std::size_t burn_in = 0;
  /// Use different sampling streams for the two chains.
  bool independent_perms = false;
  /// Visit components in index order every epoch (debugging aid).
  bool fixed_order = false;
  ChainExecution execution = ChainExecution::Sequential;
  /// sigma*^2 for the perturbation; computed at x* when absent.
  std::optional<double> sigma_star_sq;
  /// Reference solution for error columns; exact_solution() when absent.
  std::optional<Vector> x_star;
};

/// Endpoint of one reshuffled SGDA pass and the inner iterates x^[1..n].
struct EpochResult {
  Vector endpoint;
  std::vector<Vector> inner;
};

/// H(x, perm): x^[j+1] = x^[j] - gamma F_{perm[j]}(x^[j]) for j = 0..n-1.
/// Throws DivergenceError when an iterate is non-finite or its norm exceeds
/// kDivergenceNorm.
EpochResult epoch_pass(const FiniteSumProblem& problem, const Vector& x, double gamma,
                       const Permutation& perm);

/// x + U with U ~ N(0, noise_scale * gamma^2 n^2 sigma_star_sq / d * I).
Vector perturb(const Vector& x, double gamma, std::size_t n, double sigma_star_sq,
               double noise_scale, CounterRng& rng);

/// Standard deviation per coordinate of the epoch perturbation.
double perturbation_sd(double gamma, std::size_t n, std::size_t d, double sigma_star_sq,
                       double noise_scale);

/// Single chain of a base method over a fixed problem. The chain owns its
/// iterate and (for OMD) the previous operator value.
class Chain {
 public:
  Chain(const FiniteSumProblem& problem, BaseMethod method, double step, Vector x0);

  /// One inner update with component i.
  void step(std::size_t i);
  /// Runs the indices in order, then applies `epoch_noise_sd * z` where z is
  /// drawn from `noise` (when non-null). Inner noise, when `inner_noise_sd`
  /// is positive, is added after each inner step instead.
  void run_epoch(const std::vector<std::size_t>& indices, CounterRng* noise,
                 double epoch_noise_sd, double inner_noise_sd,
                 std::vector<Vector>* inner = nullptr);

  const Vector& state() const { return x_; }
  void set_state(const Vector& x);
  double step_size() const { return step_; }

 private:
  void commit(std::size_t i);

  const FiniteSumProblem* problem_;
  BaseMethod method_;
  double step_;
  Vector x_, next_, g_, half_, prev_g_;
  bool has_prev_ = false;
  std::size_t steps_ = 0;
};

enum class RunStatus { Ok, Diverged };

struct Trajectory {
  double step_size = 0.0;
  /// x_0, ..., x_K (epoch level).
  std::vector<Vector> epoch_iterates;
  /// inner_iterates[k][j] = x_k^{j+1} when record_inner is set.
  std::vector<std::vector<Vector>> inner_iterates;
  /// ||x_k - x*||^2 when x* is known.
  std::vector<double> per_epoch_error;
  /// Hash of the index sequence consumed in each epoch.
  std::vector<std::uint64_t> epoch_index_hash;
  /// Cumulative wall time at the end of each epoch, milliseconds.
  std::vector<double> epoch_wall_ms;
  double wall_time = 0.0;
  RunStatus status = RunStatus::Ok;
  std::size_t diverged_epoch = 0;
  std::string message;
};

struct ExtrapolatedEstimate {
  Vector last;
  Vector averaged;
  double source_gamma = 0.0;
};

struct RunResult {
  Variant variant = Variant::RRresh;
  Trajectory primary;
  std::optional<Trajectory> companion;
  /// Per epoch k = 0..K: 2 x_k^[gamma] - x_k^[2 gamma].
  std::vector<Vector> extrap_last;
  /// Per epoch k: averaged extrapolation over epochs burn_in+1..k; empty
  /// vectors while k <= burn_in.
  std::vector<Vector> extrap_avg;
  std::vector<double> err_extrap_last;
  std::vector<double> err_extrap_avg;
  std::optional<ExtrapolatedEstimate> estimate;
  /// Per-epoch cumulative wall time of the whole run.
  std::vector<double> epoch_wall_ms;
  double wall_time = 0.0;
  std::optional<Vector> x_star;

  bool diverged() const;
  /// Output of the run: the extrapolated last iterate for extrapolated
  /// variants, the chain's last iterate otherwise.
  Vector final_iterate() const;
  /// ||final - x*||^2 per epoch (extrapolated where applicable).
  const std::vector<double>& error_curve() const;
};

/// Sampling plans matching a config: with-replacement for Plain/RRrom,
/// reshuffled (or fixed-order) otherwise; the two chains share one stream
/// unless independent_perms is set.
CoupledPlans plans_for(const RunConfig& config);

RunResult run_variant(const FiniteSumProblem& problem, const RunConfig& config,
                      const CoupledPlans& plans);
/// Single-plan overload; rejects extrapolated variants.
RunResult run_variant(const FiniteSumProblem& problem, const RunConfig& config,
                      const SamplingPlan& plan);
RunResult run_variant(const FiniteSumProblem& problem, const RunConfig& config);

/// Drives one variant epoch by epoch without keeping a trajectory. Same
/// sampling, noise and coupling rules as run_variant; divergence throws.
class VariantStepper {
 public:
  /// `sigma_star_sq` scales the perturbation and is ignored when
  /// config.perturb is off.
  VariantStepper(const FiniteSumProblem& problem, const RunConfig& config, CoupledPlans plans,
                 const Vector& x0, double sigma_star_sq);

  void advance();
  /// 2 x^gamma - x^{2 gamma} for extrapolated variants, the chain state
  /// otherwise.
  const Vector& output() const { return output_; }
  const Vector& state_gamma() const { return chain_.state(); }
  /// Only meaningful for extrapolated variants.
  const Vector& state_two_gamma() const;
  std::size_t epoch() const { return epoch_; }

 private:
  const FiniteSumProblem* problem_;
  bool extrap_;
  CoupledPlans plans_;
  Chain chain_;
  std::optional<Chain> chain_2g_;
  double sd_[2] = {0.0, 0.0};
  double inner_sd_[2] = {0.0, 0.0};
  Vector output_;
  std::size_t epoch_ = 0;
};

/// (1/n) sum_i ||F_i(x)||^2, i.e. sigma*^2 when x solves the problem.
double component_second_moment(const FiniteSumProblem& problem, const Vector& x);

Vector extrapolate_last(const Vector& x_gamma, const Vector& x_two_gamma);
/// (2 S_gamma - S_2gamma) / k for running sums of k epoch endpoints.
Vector extrapolate_average(const Vector& sum_gamma, const Vector& sum_two_gamma, std::size_t k);

}  // namespace rrvi

#endif  // RRVI_SOLVER_HPP
