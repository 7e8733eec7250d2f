#include "rrvi/samplers.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "rrvi/errors.hpp"

namespace rrvi {

std::uint64_t CounterRng::bounded(std::uint64_t bound) {
  if (bound == 0) throw ParameterError("bounded: bound must be positive");
  __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

// Marsaglia polar method. Written out rather than std::normal_distribution so
// streams are identical across standard libraries.
double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Vector normal_vector(CounterRng& rng, Eigen::Index d) {
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  return z;
}

const char* to_string(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::Reshuffle:
      return "reshuffle";
    case SamplingMode::WithReplacement:
      return "withrep";
    case SamplingMode::FixedOrder:
      return "fixed";
  }
  return "?";
}

SamplingMode sampling_mode_from_string(const std::string& name) {
  if (name == "reshuffle") return SamplingMode::Reshuffle;
  if (name == "withrep") return SamplingMode::WithReplacement;
  if (name == "fixed") return SamplingMode::FixedOrder;
  throw ParameterError("unknown sampling mode '" + name + "'");
}

Permutation SamplingPlan::next_permutation(std::size_t n) {
  if (n == 0) throw ParameterError("next_permutation: n must be positive");
  if (mode_ == SamplingMode::WithReplacement) {
    throw ParameterError("next_permutation: plan is in with-replacement mode");
  }
  Permutation perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (mode_ == SamplingMode::Reshuffle) {
    CounterRng rng(seed_, stream_ * 16 + streams::kSampling, counter_);
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.bounded(i + 1));
      std::swap(perm[i], perm[j]);
    }
  }
  ++counter_;
  return perm;
}

std::size_t SamplingPlan::next_with_replacement(std::size_t n) {
  if (n == 0) throw ParameterError("next_with_replacement: n must be positive");
  if (mode_ != SamplingMode::WithReplacement) {
    throw ParameterError("next_with_replacement: plan is not in with-replacement mode");
  }
  CounterRng rng(seed_, stream_ * 16 + streams::kSampling, counter_++);
  return static_cast<std::size_t>(rng.bounded(n));
}

std::vector<std::size_t> SamplingPlan::next_epoch(std::size_t n) {
  if (mode_ != SamplingMode::WithReplacement) return next_permutation(n);
  if (n == 0) throw ParameterError("next_epoch: n must be positive");
  // One keyed generator per epoch keeps the per-step cost to a single draw.
  CounterRng rng(seed_, stream_ * 16 + streams::kSampling, counter_++);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.bounded(n));
  return idx;
}

CoupledPlans make_coupled(std::uint64_t seed, SamplingMode mode, bool independent) {
  CoupledPlans plans{SamplingPlan(mode, seed, 0), SamplingPlan(mode, seed, independent ? 1 : 0)};
  return plans;
}

bool is_permutation_of_range(const Permutation& perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto i : perm) {
    if (i >= n || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

}  // namespace rrvi
