#include "rrvi/stationary.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "rrvi/errors.hpp"
#include "rrvi/samplers.hpp"
#include "rrvi/stats.hpp"

namespace rrvi {

namespace {

void require_affine(const FiniteSumProblem& problem, const char* who) {
  if (!problem.is_affine()) throw UnsupportedError(std::string(who) + " requires an affine problem");
}

void apply_component(const FiniteSumProblem& problem, double gamma, std::size_t i, Matrix& A,
                     Vector& b) {
  A -= gamma * (problem.matrix(i) * A);
  b -= gamma * (problem.matrix(i) * b + problem.offset(i));
}

void enumerate(const FiniteSumProblem& problem, double gamma, std::vector<bool>& used,
               std::size_t depth, const Matrix& A, const Vector& b, Matrix& sum_A,
               Vector& sum_b) {
  const std::size_t n = problem.n();
  if (depth == n) {
    sum_A += A;
    sum_b += b;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = true;
    Matrix A2 = A;
    Vector b2 = b;
    apply_component(problem, gamma, i, A2, b2);
    enumerate(problem, gamma, used, depth + 1, A2, b2, sum_A, sum_b);
    used[i] = false;
  }
}

}  // namespace

AffineMap epoch_affine_map(const FiniteSumProblem& problem, double gamma,
                           const Permutation& perm) {
  require_affine(problem, "epoch_affine_map");
  if (!is_permutation_of_range(perm, problem.n())) {
    throw ParameterError("epoch_affine_map: perm is not a permutation of the components");
  }
  const auto d = static_cast<Eigen::Index>(problem.d());
  AffineMap m{Matrix::Identity(d, d), Vector::Zero(d)};
  for (auto i : perm) apply_component(problem, gamma, i, m.A, m.b);
  return m;
}

AffineMap mean_epoch_map(const FiniteSumProblem& problem, double gamma) {
  require_affine(problem, "mean_epoch_map");
  const std::size_t n = problem.n();
  if (n > 8) {
    throw ParameterError("mean_epoch_map: n = " + std::to_string(n) +
                         " exceeds the enumeration limit of 8 components");
  }
  const auto d = static_cast<Eigen::Index>(problem.d());
  Matrix sum_A = Matrix::Zero(d, d);
  Vector sum_b = Vector::Zero(d);
  std::vector<bool> used(n, false);
  enumerate(problem, gamma, used, 0, Matrix::Identity(d, d), Vector::Zero(d), sum_A, sum_b);
  double count = 1.0;
  for (std::size_t j = 2; j <= n; ++j) count *= static_cast<double>(j);
  return {sum_A / count, sum_b / count};
}

StationaryMean stationary_mean_report(const FiniteSumProblem& problem, double gamma,
                                      bool perturbed) {
  const AffineMap avg = mean_epoch_map(problem, gamma);
  const auto d = avg.A.rows();
  StationaryMean out;
  Eigen::EigenSolver<Matrix> es(avg.A, false);
  out.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(out.spectral_radius < 1.0)) {
    throw NonContractiveError("stationary_mean_exact: averaged epoch map has spectral radius " +
                              std::to_string(out.spectral_radius) + " >= 1");
  }
  const Matrix K = Matrix::Identity(d, d) - avg.A;
  Eigen::PartialPivLU<Matrix> lu(K);
  out.mean = lu.solve(avg.b);
  out.mean += lu.solve(avg.b - K * out.mean);
  out.residual = (K * out.mean - avg.b).norm();
  if (perturbed) {
    out.warning = "perturbation is zero-mean; the stationary mean equals the unperturbed one";
  }
  return out;
}

Vector stationary_mean_exact(const FiniteSumProblem& problem, double gamma, bool perturbed) {
  return stationary_mean_report(problem, gamma, perturbed).mean;
}

const char* to_string(BiasEstimator e) {
  return e == BiasEstimator::ExactEnum ? "exact-enum" : "monte-carlo";
}

BiasEstimator bias_estimator_from_string(const std::string& name) {
  if (name == "exact-enum") return BiasEstimator::ExactEnum;
  if (name == "monte-carlo") return BiasEstimator::MonteCarlo;
  throw ParameterError("unknown bias estimator '" + name + "'");
}

std::optional<double> floored_slope(std::span<const double> x, std::span<const double> y,
                                    double floor) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (y[i] > floor && x[i] > 0.0) pts.emplace_back(x[i], y[i]);
  }
  if (pts.size() < 2) return std::nullopt;
  return fit_loglog_slope(pts);
}

namespace {

// Standard error of ||m - x*|| from per-seed means, projected on the
// direction of m - x*.
double norm_standard_error(const std::vector<Vector>& per_seed, const Vector& m,
                           const Vector& x_star) {
  const Vector dir = m - x_star;
  const double len = dir.norm();
  std::vector<double> proj;
  proj.reserve(per_seed.size());
  if (len > 0.0) {
    for (const auto& v : per_seed) proj.push_back(dir.dot(v - x_star) / len);
  } else {
    for (const auto& v : per_seed) proj.push_back((v - x_star).norm());
  }
  return standard_error(proj);
}

}  // namespace

BiasCurve bias_curve(const FiniteSumProblem& problem, std::span<const double> gammas,
                     BiasEstimator estimator, const BiasCurveOptions& options) {
  if (gammas.empty()) throw ParameterError("bias_curve: empty gamma list");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0)) throw ParameterError("bias_curve: step sizes must be positive");
    if (i > 0 && !(gammas[i] > gammas[i - 1])) {
      throw ParameterError("bias_curve: step sizes must be sorted ascending");
    }
  }
  require_affine(problem, "bias_curve");
  const Vector x_star = options.x_star ? *options.x_star : exact_solution(problem);
  if (options.check_admissible) {
    const ProblemConstants c = problem_constants(problem, x_star);
    for (double g : gammas) {
      if (auto branch = violated_gamma_branch(problem.n(), c.mu, c.L_max, 2.0 * g, true)) {
        throw ParameterError("bias_curve: 2*gamma = " + std::to_string(2.0 * g) +
                             " violates the step-size branch " + *branch);
      }
    }
  }

  BiasCurve curve;
  curve.estimator = estimator;
  curve.gammas.assign(gammas.begin(), gammas.end());
  for (double g : gammas) {
    if (estimator == BiasEstimator::ExactEnum) {
      const Vector m1 = stationary_mean_exact(problem, g);
      const Vector m2 = stationary_mean_exact(problem, 2.0 * g);
      curve.bias_plain.push_back((m1 - x_star).norm());
      curve.bias_extrap.push_back((2.0 * m1 - m2 - x_star).norm());
    } else {
      RunConfig cfg = options.run;
      cfg.gamma = g;
      cfg.x_star = x_star;
      MonteCarloOptions mc = options.monte_carlo;
      mc.x_star = x_star;
      const TailMeanEstimate est = tail_mean_estimate(problem, cfg, mc);
      curve.bias_plain.push_back((est.mean_gamma - x_star).norm());
      curve.bias_extrap.push_back((est.mean_extrap - x_star).norm());
      curve.bias_plain_se.push_back(norm_standard_error(est.per_seed_gamma, est.mean_gamma, x_star));
      curve.bias_extrap_se.push_back(
          norm_standard_error(est.per_seed_extrap, est.mean_extrap, x_star));
    }
  }
  curve.slope_plain = floored_slope(curve.gammas, curve.bias_plain);
  curve.slope_extrap = floored_slope(curve.gammas, curve.bias_extrap);
  return curve;
}

}  // namespace rrvi
