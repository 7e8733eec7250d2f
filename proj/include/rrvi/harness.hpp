#ifndef RRVI_HARNESS_HPP
#define RRVI_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rrvi/problems.hpp"
#include "rrvi/solver.hpp"

namespace rrvi::harness {

/// Where a command gets its problem: a JSON file, or a generator spec.
struct ProblemOptions {
  std::string path;
  /// game | affine | wgan
  std::string kind = "game";
  std::size_t n = 100;
  std::size_t d = 100;
  double mu = 1.0;
  double L = 1.0;
  double coupling_max = 0.1;
  double offset_scale = 1.0;
  bool resample_basis = false;
  double shift = 1.0;
  double sym_spread = 0.3;
  double skew_spread = 0.3;
  double cov_scale = 1.0;
  /// Generator seed; the global seed when absent.
  std::optional<std::uint64_t> seed;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  /// Output path; empty means stdout.
  std::string out;
};

FiniteSumProblem build_problem(const ProblemOptions& opt, std::uint64_t global_seed);

struct RunOptions {
  ProblemOptions problem;
  double gamma = 1e-3;
  std::size_t epochs = 100;
  std::string variant = "rrrom-rrresh";
  std::string method = "sgda";
  bool perturb = false;
  double noise_scale = 1.0;
  bool inner_noise = false;
  /// reshuffle | withrep | fixed; empty follows the variant.
  std::string sampling;
  bool independent_perms = false;
  std::optional<double> sigma_star_sq;
  std::size_t burn_in = 0;
  bool record_time = false;
  std::string execution = "lockstep";
  /// zero | random | star
  std::string x0 = "random";
  /// Independent runs averaged into one curve.
  std::size_t repeats = 1;
  /// Optional binary dump of the primary chain's epoch iterates.
  std::string iterates_out;
};

/// RunConfig for one repeat of a run command.
RunConfig make_run_config(const RunOptions& opt, const FiniteSumProblem& problem,
                          std::uint64_t seed);

struct SweepOptions {
  ProblemOptions problem;
  /// bias | mse | fourth | third
  std::string suite = "bias";
  std::vector<double> gammas;
  std::string estimator = "exact-enum";
  std::string variant = "rrresh";
  bool perturb = false;
  double noise_scale = 1.0;
  std::size_t seeds = 20;
  std::size_t min_window = 500;
  bool check_convergence = true;
  /// Slope summary destination; empty prints it to the log stream.
  std::string summary_out;
};

struct CltCommandOptions {
  ProblemOptions problem;
  std::vector<std::size_t> T{100, 500, 1000};
  /// Explicit step sizes; when empty, gamma_fractions * gamma_max is used.
  std::vector<double> gammas;
  std::vector<double> gamma_fractions{1.0, 0.01};
  std::size_t trials = 2000;
  std::string observable = "game-value";
  std::string variant = "rrresh";
  bool perturb = true;
  std::string summary_out;
};

struct LemmaCheckOptions {
  ProblemOptions problem;
  /// fourth-moment | jacobian | prop-bounds | drift
  std::string suite = "fourth-moment";
  std::size_t instances = 50;
  std::size_t permutations = 20;
  /// gamma = gamma_factor * gamma_max for the jacobian and drift suites.
  double gamma_factor = 0.5;
  std::size_t points = 1000;
  std::size_t states = 10;
  std::size_t samples = 2000;
};

struct TimingOptions {
  ProblemOptions problem;
  double gamma = 1e-4;
  std::size_t epochs = 100;
  std::string execution = "lockstep";
  bool perturb = true;
  /// Each variant is timed this many times; the fastest run is reported.
  std::size_t repeats = 5;
};

struct WallClockReport {
  std::string method;
  double seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Experiments shared by the commands and the acceptance checks.

/// Mean over seeds of the per-epoch squared errors of one variant. Seed s
/// runs with derive_key(seed, kTrial, s).
struct AveragedCurve {
  Variant variant = Variant::RRresh;
  /// gamma chain
  std::vector<double> err_sq;
  /// Empty for single-chain variants.
  std::vector<double> err_sq_extrap_last;
  std::vector<double> err_sq_extrap_avg;
  bool diverged = false;
  std::size_t seeds = 0;

  /// Error of the variant's output: the extrapolated last iterate where
  /// applicable.
  const std::vector<double>& output_error() const;
  /// log10(output_error()[K] / err_sq[0]).
  double final_relative_error() const;
};

AveragedCurve averaged_curve(const FiniteSumProblem& problem, const RunOptions& opt,
                             std::uint64_t seed, std::size_t seeds);

/// Same columns as write_trajectory_csv.
void write_averaged_csv(const AveragedCurve& curve, std::ostream& out);

std::vector<WallClockReport> time_variants(const FiniteSumProblem& problem,
                                           const TimingOptions& opt);

struct FourthMomentSuiteReport {
  std::size_t instances = 0;
  std::size_t cases = 0;
  std::size_t identity_failures = 0;
  std::size_t bound_failures = 0;
  double worst_relative_gap = 0.0;
  nlohmann::json details = nlohmann::json::array();
};

/// Random instances with n in [2, 8], d in [1, 5]; every k is checked.
FourthMomentSuiteReport fourth_moment_suite(std::size_t instances, std::uint64_t seed);

struct JacobianSuiteReport {
  std::size_t problems = 0;
  std::size_t permutations = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  nlohmann::json details = nlohmann::json::array();
};

/// Random affine problems with n, d in [1, 6] at gamma = factor * gamma_max.
JacobianSuiteReport jacobian_suite(std::size_t problems, std::size_t permutations,
                                   double gamma_factor, std::uint64_t seed);

/// Relative comparison used by the fourth-moment checks.
bool close_relative(double a, double b, double rel, double abs_floor);

// ---------------------------------------------------------------------------
// Commands. Each writes its main output to global.out, or to `out` when no
// path is set, and diagnostics to `log`. The return value is the process exit
// code; library errors propagate to the caller.

int cmd_gen(const ProblemOptions& opt, const GlobalOptions& global, std::ostream& out,
            std::ostream& log);
int cmd_run(const RunOptions& opt, const GlobalOptions& global, std::ostream& out,
            std::ostream& log);
int cmd_sweep(const SweepOptions& opt, const GlobalOptions& global, std::ostream& out,
              std::ostream& log);
int cmd_clt(const CltCommandOptions& opt, const GlobalOptions& global, std::ostream& out,
            std::ostream& log);
int cmd_lemma_check(const LemmaCheckOptions& opt, const GlobalOptions& global,
                    std::ostream& out, std::ostream& log);
int cmd_timing(const TimingOptions& opt, const GlobalOptions& global, std::ostream& out,
               std::ostream& log);

nlohmann::json to_json(const ProblemOptions& o);
nlohmann::json to_json(const GlobalOptions& o);
nlohmann::json to_json(const RunOptions& o);
nlohmann::json to_json(const SweepOptions& o);
nlohmann::json to_json(const CltCommandOptions& o);
nlohmann::json to_json(const LemmaCheckOptions& o);
nlohmann::json to_json(const TimingOptions& o);

}  // namespace rrvi::harness

#endif  // RRVI_HARNESS_HPP
