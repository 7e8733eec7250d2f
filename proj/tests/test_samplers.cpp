#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "rrvi/errors.hpp"
#include "rrvi/samplers.hpp"

using namespace rrvi;

TEST(Permutation, SingleComponentIsIdentity) {
  SamplingPlan plan(SamplingMode::Reshuffle, 99);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(plan.next_permutation(1), Permutation{0});
}

TEST(Permutation, UniformOverSixOrders) {
  SamplingPlan plan(SamplingMode::Reshuffle, 2024);
  std::map<Permutation, int> counts;
  const int draws = 60000;
  for (int k = 0; k < draws; ++k) ++counts[plan.next_permutation(3)];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [perm, c] : counts) {
    EXPECT_NEAR(static_cast<double>(c) / draws, 1.0 / 6.0, 0.01);
  }
}

TEST(Permutation, ReplayIsDeterministic) {
  SamplingPlan a(SamplingMode::Reshuffle, 5), b(SamplingMode::Reshuffle, 5);
  a.set_epoch_counter(17);
  b.set_epoch_counter(17);
  EXPECT_EQ(a.next_permutation(20), b.next_permutation(20));
}

TEST(Permutation, EveryEpochIsABijection) {
  SamplingPlan plan(SamplingMode::Reshuffle, 1);
  for (std::size_t n = 1; n <= 40; ++n) {
    Permutation p = plan.next_permutation(n);
    std::sort(p.begin(), p.end());
    Permutation expect(n);
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    EXPECT_EQ(p, expect);
  }
}

TEST(Permutation, RejectsEmptyRangeAndWrongMode) {
  SamplingPlan plan(SamplingMode::Reshuffle, 1);
  EXPECT_THROW(plan.next_permutation(0), ParameterError);
  SamplingPlan wr(SamplingMode::WithReplacement, 1);
  EXPECT_THROW(wr.next_permutation(3), ParameterError);
}

TEST(Permutation, FixedOrderIsIdentity) {
  SamplingPlan plan(SamplingMode::FixedOrder, 7);
  EXPECT_EQ(plan.next_permutation(4), (Permutation{0, 1, 2, 3}));
  EXPECT_EQ(plan.next_epoch(4), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(WithReplacement, SingleIndex) {
  SamplingPlan plan(SamplingMode::WithReplacement, 3);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(plan.next_with_replacement(1), 0u);
}

TEST(WithReplacement, UniformFrequencies) {
  SamplingPlan plan(SamplingMode::WithReplacement, 77);
  std::vector<int> counts(4, 0);
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) ++counts[plan.next_with_replacement(4)];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / draws, 0.25, 0.01);
}

TEST(WithReplacement, ReplayIsDeterministic) {
  SamplingPlan a(SamplingMode::WithReplacement, 8), b(SamplingMode::WithReplacement, 8);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_with_replacement(13), b.next_with_replacement(13));
  SamplingPlan c(SamplingMode::WithReplacement, 8), d(SamplingMode::WithReplacement, 8);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(c.next_epoch(13), d.next_epoch(13));
}

TEST(WithReplacement, RejectsEmptyRangeAndWrongMode) {
  SamplingPlan plan(SamplingMode::WithReplacement, 1);
  EXPECT_THROW(plan.next_with_replacement(0), ParameterError);
  SamplingPlan rs(SamplingMode::Reshuffle, 1);
  EXPECT_THROW(rs.next_with_replacement(3), ParameterError);
}

TEST(Coupled, SharedPermutations) {
  for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
    CoupledPlans plans = make_coupled(seed);
    EXPECT_TRUE(plans.coupled());
    for (int k = 0; k < 10; ++k) {
      EXPECT_EQ(plans.plan_gamma.next_permutation(5), plans.plan_two_gamma.next_permutation(5));
    }
  }
}

TEST(Coupled, IndependentStreamsDiffer) {
  CoupledPlans plans = make_coupled(3, SamplingMode::Reshuffle, true);
  EXPECT_FALSE(plans.coupled());
  int differing = 0;
  for (int k = 0; k < 10; ++k) {
    if (plans.plan_gamma.next_permutation(6) != plans.plan_two_gamma.next_permutation(6)) ++differing;
  }
  EXPECT_GT(differing, 0);
}

TEST(Coupled, SeedsGiveDifferentFirstEpochs) {
  CoupledPlans a = make_coupled(0), b = make_coupled(1);
  EXPECT_NE(a.plan_gamma.next_permutation(10), b.plan_gamma.next_permutation(10));
}

TEST(CounterRng, SubstreamsAreAddressable) {
  CounterRng a(42, streams::kNoise, 3), b(42, streams::kNoise, 3), c(42, streams::kNoise, 4);
  const auto va = a(), vb = b(), vc = c();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
}

TEST(CounterRng, NormalMoments) {
  CounterRng rng(9, streams::kTrial, 0);
  double s = 0.0, s2 = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / m, 0.0, 0.01);
  EXPECT_NEAR(s2 / m, 1.0, 0.01);
}

TEST(CounterRng, BoundedIsInRange) {
  CounterRng rng(1);
  for (std::uint64_t bound : {1ull, 2ull, 3ull, 1000ull, (1ull << 40) + 7}) {
    for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.bounded(bound), bound);
  }
  EXPECT_THROW(rng.bounded(0), ParameterError);
}

TEST(SamplingMode, StringRoundTrip) {
  for (auto m : {SamplingMode::Reshuffle, SamplingMode::WithReplacement, SamplingMode::FixedOrder}) {
    EXPECT_EQ(sampling_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(sampling_mode_from_string("shuffle-once"), ParameterError);
}
