#ifndef RRVI_JACOBIAN_HPP
#define RRVI_JACOBIAN_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rrvi/problems.hpp"
#include "rrvi/types.hpp"

namespace rrvi {

/// Jacobian of x -> H(x, perm) at `at`. Affine problems use the product
/// (I - g M_{perm[n-1]}) ... (I - g M_{perm[0]}); others use central
/// differences with step 1e-6 (1 + ||at||).
Matrix full_pass_jacobian(const FiniteSumProblem& problem, double gamma, const Permutation& perm,
                          const Vector& at);

struct JacobianCheckOptions {
  std::uint64_t seed = 0;
  /// Evaluation point; exact_solution() for affine problems when absent.
  std::optional<Vector> x_star;
  /// Largest component Lipschitz constant; computed from the matrices when
  /// absent.
  std::optional<double> L_max;
};

/// ||I - J(perm)||_op against 1 + sum_{i=1..n} (gamma L_max)^i over random
/// permutations.
struct JacobianCheckReport {
  double gamma = 0.0;
  double L_max = 0.0;
  double bound = 0.0;
  std::vector<double> norms;
  double max_norm = 0.0;
  std::size_t violations = 0;
  bool holds() const { return violations == 0; }
};

JacobianCheckReport jacobian_bound_check(const FiniteSumProblem& problem, double gamma,
                                         std::size_t samples,
                                         const JacobianCheckOptions& options = {});

/// 1 + sum_{i=1..n} (gamma L)^i.
double jacobian_norm_bound(std::size_t n, double gamma, double L_max);

}  // namespace rrvi

#endif  // RRVI_JACOBIAN_HPP
