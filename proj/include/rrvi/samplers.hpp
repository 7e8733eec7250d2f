#ifndef RRVI_SAMPLERS_HPP
#define RRVI_SAMPLERS_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rrvi/types.hpp"

namespace rrvi {

/// SplitMix64 finalizer. Used both as the output function of CounterRng and
/// to derive keys from (seed, stream, counter) triples.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t counter) {
  std::uint64_t k = mix64(seed + 0x9e3779b97f4a7c15ULL);
  k = mix64(k ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
  return mix64(k ^ (counter * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL));
}

/// Counter-based generator: output j of the stream keyed by `key` is
/// mix64(key + (j+1) * golden). Any (seed, stream, counter) triple addresses an
/// independent, replayable substream, so trials and epochs can run in any
/// order or concurrently without sharing state. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
      : key_(derive_key(seed, stream, counter)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ctr_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ + ctr_);
  }

  /// Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
  std::uint64_t bounded(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Standard-normal vector of length d.
Vector normal_vector(CounterRng& rng, Eigen::Index d);

// Stream identifiers. Keys are derived from (seed, stream, counter), so every
// consumer of randomness gets its own tag.
namespace streams {
inline constexpr std::uint64_t kSampling = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kProblem = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kTrial = 5;
}  // namespace streams

enum class SamplingMode { Reshuffle, WithReplacement, FixedOrder };

const char* to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(const std::string& name);

/// A replayable index stream. The permutation (or draw) emitted for a given
/// counter value depends only on (seed, stream, counter), so cloning a plan
/// and replaying it yields identical output.
class SamplingPlan {
 public:
  SamplingPlan() = default;
  SamplingPlan(SamplingMode mode, std::uint64_t seed, std::uint64_t stream = 0)
      : mode_(mode), seed_(seed), stream_(stream) {}

  SamplingMode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t epoch_counter() const { return counter_; }
  void set_epoch_counter(std::uint64_t counter) { counter_ = counter; }

  /// Uniform permutation of {0,...,n-1} for the current epoch (Fisher-Yates);
  /// advances the epoch counter. Requires Reshuffle or FixedOrder mode.
  Permutation next_permutation(std::size_t n);

  /// One uniform index in {0,...,n-1}; advances the draw counter. Requires
  /// WithReplacement mode.
  std::size_t next_with_replacement(std::size_t n);

  /// The n component indices visited during the next epoch, whatever the mode.
  /// With-replacement epochs consume n consecutive draws.
  std::vector<std::size_t> next_epoch(std::size_t n);

  /// Generator keyed to this plan's stream for auxiliary per-epoch randomness
  /// (the perturbation). Coupled plans share it.
  CounterRng noise_rng(std::uint64_t epoch) const {
    return CounterRng(seed_, stream_ * 16 + streams::kNoise, epoch);
  }

 private:
  SamplingMode mode_ = SamplingMode::Reshuffle;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
};

/// Plans for the gamma and 2*gamma chains of an extrapolated run.
struct CoupledPlans {
  SamplingPlan plan_gamma;
  SamplingPlan plan_two_gamma;

  bool coupled() const {
    return plan_gamma.seed() == plan_two_gamma.seed() &&
           plan_gamma.stream() == plan_two_gamma.stream() &&
           plan_gamma.mode() == plan_two_gamma.mode();
  }
};

/// Both chains share one key, so their epoch-k permutations coincide. With
/// `independent` set the 2*gamma chain reads a different stream.
CoupledPlans make_coupled(std::uint64_t seed,
                          SamplingMode mode = SamplingMode::Reshuffle,
                          bool independent = false);

bool is_permutation_of_range(const Permutation& perm, std::size_t n);

}  // namespace rrvi

#endif  // RRVI_SAMPLERS_HPP
