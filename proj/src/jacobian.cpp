#include "rrvi/jacobian.hpp"

#include <algorithm>
#include <cmath>

#include "rrvi/errors.hpp"
#include "rrvi/samplers.hpp"
#include "rrvi/solver.hpp"

namespace rrvi {

Matrix full_pass_jacobian(const FiniteSumProblem& problem, double gamma, const Permutation& perm,
                          const Vector& at) {
  const std::size_t n = problem.n();
  const auto d = static_cast<Eigen::Index>(problem.d());
  if (!is_permutation_of_range(perm, n)) {
    throw ParameterError("full_pass_jacobian: perm is not a permutation of the components");
  }
  if (at.size() != d) throw ParameterError("full_pass_jacobian: point has the wrong dimension");
  Matrix J = Matrix::Identity(d, d);
  if (problem.is_affine()) {
    for (auto i : perm) J = J - gamma * (problem.matrix(i) * J);
  } else {
    const double h = 1e-6 * (1.0 + at.norm());
    Vector xp = at, xm = at;
    for (Eigen::Index c = 0; c < d; ++c) {
      xp[c] = at[c] + h;
      xm[c] = at[c] - h;
      J.col(c) = (epoch_pass(problem, xp, gamma, perm).endpoint -
                  epoch_pass(problem, xm, gamma, perm).endpoint) /
                 (2.0 * h);
      xp[c] = at[c];
      xm[c] = at[c];
    }
  }
  if (!J.allFinite()) {
    throw DivergenceError("full_pass_jacobian: non-finite entries", at, 0);
  }
  return J;
}

double jacobian_norm_bound(std::size_t n, double gamma, double L_max) {
  double bound = 1.0, term = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    term *= gamma * L_max;
    bound += term;
  }
  return bound;
}

JacobianCheckReport jacobian_bound_check(const FiniteSumProblem& problem, double gamma,
                                         std::size_t samples,
                                         const JacobianCheckOptions& options) {
  const auto d = static_cast<Eigen::Index>(problem.d());
  Vector at;
  if (options.x_star) {
    at = *options.x_star;
  } else if (problem.is_affine()) {
    at = exact_solution(problem);
  } else {
    throw ParameterError("jacobian_bound_check: x* is required for non-affine problems");
  }
  JacobianCheckReport rep;
  rep.gamma = gamma;
  if (options.L_max) {
    rep.L_max = *options.L_max;
  } else if (problem.is_affine()) {
    for (std::size_t i = 0; i < problem.n(); ++i) {
      rep.L_max = std::max(rep.L_max, spectral_norm(problem.matrix(i)));
    }
  } else {
    throw ParameterError("jacobian_bound_check: L_max is required for non-affine problems");
  }
  rep.bound = jacobian_norm_bound(problem.n(), gamma, rep.L_max);
  SamplingPlan plan(SamplingMode::Reshuffle, options.seed);
  const Matrix I = Matrix::Identity(d, d);
  for (std::size_t s = 0; s < samples; ++s) {
    const Permutation perm = plan.next_permutation(problem.n());
    const Matrix G = I - full_pass_jacobian(problem, gamma, perm, at);
    const double norm = spectral_norm(G, 1e-13);
    rep.norms.push_back(norm);
    rep.max_norm = std::max(rep.max_norm, norm);
    if (norm > rep.bound * (1.0 + 1e-12)) ++rep.violations;
  }
  return rep;
}

}  // namespace rrvi
