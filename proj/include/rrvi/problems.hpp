#ifndef RRVI_PROBLEMS_HPP
#define RRVI_PROBLEMS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rrvi/types.hpp"

namespace rrvi {

enum class ProblemKind { QuadraticGame, ToyWGAN, GenericAffine, Custom };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// Evaluates F_i(x) into `out` for a non-affine component operator.
using ComponentEvaluator =
    std::function<void(std::size_t i, const Vector& x, Vector& out)>;

/// Generator parameters for the strongly-monotone quadratic min-max game
///   min_{x1} max_{x2} (1/n) sum_i  x1'A_i x1 / 2 + x1'B_i x2 - x2'C_i x2 / 2 + ...
/// with A_i = P_A D_i P_A' (D_i ~ U[mu, L]), C_i likewise and
/// B_i = P_B D_i P_B' (D_i ~ U[0, coupling_max]).
struct QuadraticGameSpec {
  std::size_t n = 100;
  std::size_t d = 100;
  double mu = 1.0;
  double L = 1.0;
  double coupling_max = 0.1;
  /// Standard deviation of the offsets a_i, c_i. Zero forces them to vanish.
  double offset_scale = 1.0;
  /// Draw a fresh orthogonal basis for every component instead of one per
  /// block family.
  bool resample_basis = false;
  std::uint64_t seed = 0;
};

/// Random strongly monotone affine problem: M_i = s*I + S_i + K_i with S_i
/// symmetric and K_i skew, entries scaled by `sym_spread` and `skew_spread`.
struct AffineProblemSpec {
  std::size_t n = 4;
  std::size_t d = 3;
  double shift = 1.0;
  double sym_spread = 0.3;
  double skew_spread = 0.3;
  double offset_scale = 1.0;
  std::uint64_t seed = 0;
};

/// A finite-sum operator F(x) = (1/n) sum_i F_i(x). Affine kinds store
/// F_i(x) = M_i x + q_i explicitly; Custom kinds carry an evaluator.
/// Immutable after construction: copies share component storage.
class FiniteSumProblem {
 public:
  static FiniteSumProblem affine(ProblemKind kind, std::vector<Matrix> matrices,
                                 std::vector<Vector> offsets);
  static FiniteSumProblem custom(std::size_t n, std::size_t d,
                                 ComponentEvaluator evaluator);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  ProblemKind kind() const { return kind_; }
  bool is_affine() const { return kind_ != ProblemKind::Custom; }

  /// out <- F_i(x). `out` must not alias `x`.
  void evaluate(std::size_t i, const Vector& x, Vector& out) const;
  Vector evaluate(std::size_t i, const Vector& x) const;
  /// F(x), the component average.
  Vector mean_operator(const Vector& x) const;

  const Matrix& matrix(std::size_t i) const;
  const Vector& offset(std::size_t i) const;
  const Matrix& mean_matrix() const;
  const Vector& mean_offset() const;

  /// Generator metadata (seed and the spec fields as a JSON object string).
  std::uint64_t seed() const { return seed_; }
  const std::string& spec_json() const { return spec_json_; }
  FiniteSumProblem with_metadata(std::uint64_t seed, std::string spec_json) const;

 private:
  struct AffineData {
    std::vector<Matrix> matrices;
    std::vector<Vector> offsets;
    Matrix mean_matrix;
    Vector mean_offset;
  };

  FiniteSumProblem() = default;
  const AffineData& affine_data() const;

  ProblemKind kind_ = ProblemKind::Custom;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::shared_ptr<const AffineData> affine_;
  ComponentEvaluator evaluator_;
  std::uint64_t seed_ = 0;
  std::string spec_json_ = "{}";
};

/// Structural constants of a problem at a solution x*.
struct ProblemConstants {
  std::vector<double> L_i;
  double L_max = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double sigma_star_sq = 0.0;
  double sigma_star_4 = 0.0;
  Vector x_star;
  double R = 0.0;
};

FiniteSumProblem generate_quadratic_game(const QuadraticGameSpec& spec);
FiniteSumProblem generate_affine_problem(const AffineProblemSpec& spec);

/// Affine saddle problem from explicit blocks, F_i(x1, x2) =
/// (A_i x1 + B_i x2 + a_i, -B_i' x1 + C_i x2 - c_i).
FiniteSumProblem make_saddle_problem(const std::vector<Matrix>& A,
                                     const std::vector<Matrix>& B,
                                     const std::vector<Matrix>& C,
                                     const std::vector<Vector>& a,
                                     const std::vector<Vector>& c,
                                     ProblemKind kind = ProblemKind::QuadraticGame);

/// x* = -Mbar^{-1} qbar for an affine problem.
Vector exact_solution(const FiniteSumProblem& problem);

/// Linear WGAN learning the mean of a Gaussian: generator theta, linear
/// discriminator w, one component per data sample.
FiniteSumProblem make_wgan_problem(const Vector& target_mean, double cov_scale,
                                   std::size_t m_samples, std::uint64_t seed);
/// Same operator built from explicit data points x_j and noise draws z_j.
FiniteSumProblem make_wgan_problem_from_samples(const std::vector<Vector>& data,
                                                const std::vector<Vector>& noise);

/// Spectral norm by power iteration on M'M.
double spectral_norm(const Matrix& m, double rel_tol = 1e-9, int max_iter = 10000);

ProblemConstants problem_constants(const FiniteSumProblem& problem, const Vector& x_star);
/// For non-affine problems the caller supplies L_i, mu and lambda; the
/// moments at x* are still computed by summation.
ProblemConstants problem_constants(const FiniteSumProblem& problem, const Vector& x_star,
                                   std::vector<double> L_i, double mu, double lambda);

/// Largest admissible constant step size for the reshuffled chain:
/// min{ 1/(3 n L), (sqrt(1 + 6 mu^2 L^2) - 1) / (12 n L^2) }.
double gamma_max(std::size_t n, double mu, double L_max);

/// The tighter bound used for the bias expansion: the above, plus
/// mu/(3 n L^2) and mu^{3/5} / (8 n L^{3/5}).
double gamma_max_bias(std::size_t n, double mu, double L_max);

/// Names the step-size branch that `gamma` exceeds, or nullopt when gamma is
/// admissible. `bias_branches` includes the bias-expansion branches.
std::optional<std::string> violated_gamma_branch(std::size_t n, double mu, double L_max,
                                                 double gamma, bool bias_branches);

/// Game value f(x1, x2) for an affine problem whose mean matrix has saddle
/// block form [[A, B], [-B', C]]; consistent with F = (grad_1 f, -grad_2 f).
double game_value(const FiniteSumProblem& problem, const Vector& x);

}  // namespace rrvi

#endif  // RRVI_PROBLEMS_HPP
