#ifndef RRVI_TYPES_HPP
#define RRVI_TYPES_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace rrvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Permutation = std::vector<std::size_t>;

// Divergence threshold on the Euclidean norm of an iterate.
inline constexpr double kDivergenceNorm = 1e12;

inline bool is_diverged(const Vector& x) {
  return !x.allFinite() || x.norm() > kDivergenceNorm;
}

}  // namespace rrvi

#endif  // RRVI_TYPES_HPP
