#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rrvi/errors.hpp"
#include "rrvi/problems.hpp"
#include "rrvi/solver.hpp"

using namespace rrvi;

namespace {

// F_1(x) = x - 1, F_2(x) = x + 1 on the real line.
FiniteSumProblem symmetric_scalar() {
  std::vector<Matrix> ms(2, Matrix::Ones(1, 1));
  std::vector<Vector> qs{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  return FiniteSumProblem::affine(ProblemKind::GenericAffine, ms, qs);
}

FiniteSumProblem kappa_one_game(std::size_t n, std::size_t d, std::uint64_t seed) {
  QuadraticGameSpec spec;
  spec.n = n;
  spec.d = d;
  spec.seed = seed;
  return generate_quadratic_game(spec);
}

const Variant kAllVariants[] = {Variant::Plain, Variant::RRresh, Variant::RRrom,
                                Variant::RRromRRresh};

}  // namespace

TEST(EpochPass, FixedPointIsKept) {
  Matrix m(2, 2);
  m << 2.0, 0.5, -0.5, 1.0;
  const Vector xs = Vector::Constant(2, 3.0);
  const auto p = FiniteSumProblem::affine(ProblemKind::GenericAffine, {m}, {-m * xs});
  const auto r = epoch_pass(p, xs, 0.1, {0});
  EXPECT_LT((r.endpoint - xs).norm(), 1e-15);
}

TEST(EpochPass, HandEvaluatedScalarExample) {
  const auto r = epoch_pass(symmetric_scalar(), Vector::Zero(1), 0.1, {0, 1});
  ASSERT_EQ(r.inner.size(), 2u);
  EXPECT_NEAR(r.inner[0][0], 0.1, 1e-15);
  EXPECT_NEAR(r.endpoint[0], -0.01, 1e-15);
}

TEST(EpochPass, MatchesAffineComposition) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto p = oracle::random_affine(seed, 7, 5);
    std::mt19937_64 rng(seed + 100);
    const Vector x = oracle::random_vector(rng, 5);
    Permutation perm{3, 0, 6, 1, 5, 2, 4};
    const auto r = epoch_pass(p, x, 0.05, perm);
    const Vector want = oracle::compose_epoch(p, x, 0.05, perm);
    EXPECT_LT((r.endpoint - want).norm(), 1e-12 * (1.0 + want.norm()));
    EXPECT_EQ(r.inner.back(), r.endpoint);
  }
}

TEST(EpochPass, RejectsNonPermutation) {
  EXPECT_THROW(epoch_pass(symmetric_scalar(), Vector::Zero(1), 0.1, {0, 0}), ParameterError);
  EXPECT_THROW(epoch_pass(symmetric_scalar(), Vector::Zero(1), 0.1, {0}), ParameterError);
}

TEST(EpochPass, DivergenceCarriesLastFiniteIterate) {
  std::vector<Matrix> ms(1, Matrix::Constant(1, 1, 1e200));
  const auto p = FiniteSumProblem::affine(ProblemKind::GenericAffine, ms, {Vector::Zero(1)});
  try {
    epoch_pass(p, Vector::Constant(1, 1e200), 1.0, {0});
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.last_finite()[0], 1e200);
    EXPECT_EQ(e.exit_code(), 3);
  }
}

TEST(Perturb, ZeroScaleIsIdentity) {
  CounterRng rng(1, streams::kNoise, 0);
  const Vector x = Vector::LinSpaced(4, -1.0, 1.0);
  EXPECT_EQ(perturb(x, 0.1, 10, 2.0, 0.0, rng), x);
}

TEST(Perturb, SecondMomentMatchesCalibration) {
  // E||U||^2 = gamma^2 n^2 sigma*^2: 4 at gamma = 0.01, 0.16 at gamma = 0.002.
  const double sigma_sq = 4.0;
  const std::size_t n = 100, d = 50;
  for (double gamma : {0.01, 0.002}) {
    const double target = gamma * gamma * n * n * sigma_sq;
    CounterRng rng(12, streams::kNoise, 0);
    double mean = 0.0;
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
      mean += perturb(Vector::Zero(d), gamma, n, sigma_sq, 1.0, rng).squaredNorm();
    }
    mean /= draws;
    EXPECT_NEAR(mean, target, 0.03 * target) << "gamma=" << gamma;
  }
}

TEST(Perturb, ReproducibleSubstream) {
  CounterRng a(5, streams::kNoise, 2), b(5, streams::kNoise, 2);
  for (int t = 0; t < 20; ++t) {
    EXPECT_EQ(perturb(Vector::Zero(1), 0.1, 3, 1.0, 1.0, a),
              perturb(Vector::Zero(1), 0.1, 3, 1.0, 1.0, b));
  }
}

TEST(Perturb, RejectsNegativeInputs) {
  CounterRng rng(1);
  EXPECT_THROW(perturb(Vector::Zero(1), 0.1, 3, -1.0, 1.0, rng), ParameterError);
  EXPECT_THROW(perturb(Vector::Zero(1), 0.1, 3, 1.0, -1.0, rng), ParameterError);
}

TEST(RunVariant, ZeroOffsetProblemDecaysToZero) {
  const auto p = oracle::random_affine(4, 4, 3, 0.0);
  for (auto v : kAllVariants) {
    for (auto m : {BaseMethod::SGDA, BaseMethod::SEG, BaseMethod::OMD}) {
      RunConfig cfg;
      cfg.gamma = 0.05;
      cfg.epochs = 2000;
      cfg.variant = v;
      cfg.base_method = m;
      cfg.x0 = Vector::Constant(3, 5.0);
      cfg.seed = 3;
      const auto r = run_variant(p, cfg);
      ASSERT_FALSE(r.diverged());
      EXPECT_LT(r.final_iterate().norm(), 1e-10) << to_string(v) << " " << to_string(m);
    }
  }
}

TEST(RunVariant, MatchesHandRolledRecursion) {
  const auto p = symmetric_scalar();
  const double g = 0.1;
  RunConfig cfg;
  cfg.gamma = g;
  cfg.epochs = 30;
  cfg.variant = Variant::RRresh;
  SamplingPlan plan(SamplingMode::Reshuffle, 77);
  SamplingPlan replay = plan;
  const auto r = run_variant(p, cfg, plan);
  double x = 0.0;
  ASSERT_EQ(r.primary.epoch_iterates.size(), 31u);
  for (std::size_t k = 0; k < 30; ++k) {
    for (auto i : replay.next_permutation(2)) x -= g * (x + (i == 0 ? -1.0 : 1.0));
    EXPECT_NEAR(r.primary.epoch_iterates[k + 1][0], x, 1e-12);
  }
}

TEST(RunVariant, GammaZeroKeepsStart) {
  const auto p = kappa_one_game(5, 3, 2);
  RunConfig cfg;
  cfg.gamma = 0.0;
  cfg.epochs = 10;
  cfg.variant = Variant::RRromRRresh;
  cfg.x0 = Vector::LinSpaced(6, 0.0, 1.0);
  const auto r = run_variant(p, cfg);
  for (const auto& x : r.extrap_last) EXPECT_EQ(x, cfg.x0);
}

TEST(RunVariant, ExecutionModesAgree) {
  const auto p = kappa_one_game(10, 7, 5);
  RunConfig cfg;
  cfg.gamma = 1e-2;
  cfg.epochs = 50;
  cfg.perturb = true;
  cfg.variant = Variant::RRromRRresh;
  cfg.seed = 8;
  cfg.execution = ChainExecution::Sequential;
  const auto a = run_variant(p, cfg);
  cfg.execution = ChainExecution::Threads;
  const auto b = run_variant(p, cfg);
  cfg.execution = ChainExecution::Lockstep;
  const auto c = run_variant(p, cfg);
  ASSERT_EQ(a.extrap_last.size(), 51u);
  for (std::size_t k = 0; k < a.extrap_last.size(); ++k) {
    EXPECT_EQ(a.extrap_last[k], b.extrap_last[k]);
    EXPECT_LT((a.extrap_last[k] - c.extrap_last[k]).norm(), 1e-12);
  }
}

TEST(RunVariant, CoupledChainsShareIndices) {
  RunConfig cfg;
  cfg.epochs = 20;
  cfg.variant = Variant::RRromRRresh;
  cfg.seed = 2;
  const auto r = run_variant(kappa_one_game(8, 2, 1), cfg);
  ASSERT_TRUE(r.companion.has_value());
  EXPECT_EQ(r.primary.epoch_index_hash, r.companion->epoch_index_hash);
  EXPECT_EQ(r.companion->step_size, 2.0 * r.primary.step_size);
}

TEST(RunVariant, PlanMismatchIsRejected) {
  const auto p = symmetric_scalar();
  RunConfig cfg;
  cfg.variant = Variant::RRresh;
  EXPECT_THROW(run_variant(p, cfg, SamplingPlan(SamplingMode::WithReplacement, 1)),
               ParameterError);
  cfg.variant = Variant::Plain;
  EXPECT_THROW(run_variant(p, cfg, SamplingPlan(SamplingMode::Reshuffle, 1)), ParameterError);
  cfg.variant = Variant::RRromRRresh;
  cfg.execution = ChainExecution::Lockstep;
  EXPECT_THROW(run_variant(p, cfg, make_coupled(1, SamplingMode::Reshuffle, true)),
               ParameterError);
}

TEST(RunVariant, InnerNoiseMatchesEpochVariance) {
  // With F_i = 0 one epoch from the origin is pure noise.
  const std::size_t n = 4, d = 10;
  const auto p = FiniteSumProblem::affine(ProblemKind::GenericAffine,
                                          std::vector<Matrix>(n, Matrix::Zero(d, d)),
                                          std::vector<Vector>(n, Vector::Zero(d)));
  const double gamma = 0.1, target = gamma * gamma * n * n * 1.0;
  for (bool inner : {false, true}) {
    RunConfig cfg;
    cfg.gamma = gamma;
    cfg.epochs = 1;
    cfg.perturb = true;
    cfg.inner_noise = inner;
    cfg.sigma_star_sq = 1.0;
    double mean = 0.0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      cfg.seed = static_cast<std::uint64_t>(t);
      mean += run_variant(p, cfg).primary.epoch_iterates.back().squaredNorm();
    }
    mean /= trials;
    EXPECT_NEAR(mean, target, 0.05 * target) << "inner_noise=" << inner;
  }
}

TEST(Extrapolation, LastIterateExamples) {
  const Vector v = Vector::LinSpaced(3, 1.0, 3.0);
  EXPECT_EQ(extrapolate_last(v, v), v);
  const Vector xs = Vector::Constant(3, 0.5), a = Vector::LinSpaced(3, -2.0, 2.0);
  const double g = 0.125;
  EXPECT_EQ(extrapolate_last(xs + g * a, xs + 2.0 * g * a), xs);
  std::mt19937_64 rng(3);
  const Vector p = oracle::random_vector(rng, 4), q = oracle::random_vector(rng, 4);
  EXPECT_EQ(extrapolate_last(p, q), (2.0 * p - q).eval());
  EXPECT_THROW(extrapolate_last(p, v), ParameterError);
}

TEST(Extrapolation, AverageExamples) {
  std::mt19937_64 rng(4);
  const Vector a = oracle::random_vector(rng, 3), b = oracle::random_vector(rng, 3);
  EXPECT_LT((extrapolate_average(a, b, 1) - extrapolate_last(a, b)).norm(), 1e-15);
  Vector sa = Vector::Zero(3), sb = Vector::Zero(3);
  for (std::size_t k = 1; k <= 6; ++k) {
    sa += a;
    sb += b;
    EXPECT_LT((extrapolate_average(sa, sb, k) - (2.0 * a - b)).norm(), 1e-14);
  }
  std::vector<Vector> xg, x2g;
  Vector direct = Vector::Zero(3);
  sa.setZero();
  sb.setZero();
  for (int m = 0; m < 5; ++m) {
    xg.push_back(oracle::random_vector(rng, 3));
    x2g.push_back(oracle::random_vector(rng, 3));
    sa += xg.back();
    sb += x2g.back();
    direct += 2.0 * xg.back() - x2g.back();
  }
  EXPECT_LT((extrapolate_average(sa, sb, 5) - direct / 5.0).norm(), 1e-14);
  EXPECT_THROW(extrapolate_average(sa, sb, 0), ParameterError);
}

TEST(Extrapolation, RunAveragesRespectBurnIn) {
  RunConfig cfg;
  cfg.gamma = 1e-2;
  cfg.epochs = 12;
  cfg.burn_in = 4;
  cfg.variant = Variant::RRromRRresh;
  cfg.seed = 6;
  const auto r = run_variant(kappa_one_game(6, 2, 3), cfg);
  const auto& tg = r.primary.epoch_iterates;
  const auto& t2 = r.companion->epoch_iterates;
  Vector direct = Vector::Zero(4);
  for (std::size_t k = 5; k <= 12; ++k) direct += 2.0 * tg[k] - t2[k];
  direct /= 8.0;
  EXPECT_LT((r.extrap_avg.back() - direct).norm(), 1e-14);
  EXPECT_EQ(r.extrap_avg[4].size(), 0);
}

TEST(Contraction, CoupledEpochMapsContract) {
  // For the unit-condition game one reshuffled pass at gamma_max shrinks the
  // distance between two coupled states by at least 1 - gamma n mu / 2.
  const std::size_t n = 20;
  const auto p = kappa_one_game(n, 4, 13);
  const auto c = problem_constants(p, exact_solution(p));
  const double g = gamma_max(n, c.mu, c.L_max);
  SamplingPlan plan(SamplingMode::Reshuffle, 5);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    const auto perm = plan.next_permutation(n);
    const Vector x = oracle::random_vector(rng, 8), y = oracle::random_vector(rng, 8);
    const double before = (x - y).norm();
    const double after = (epoch_pass(p, x, g, perm).endpoint - epoch_pass(p, y, g, perm).endpoint).norm();
    EXPECT_LE(after, (1.0 - g * n * c.mu / 2.0) * before);
  }
}

TEST(Names, StringRoundTrips) {
  for (auto v : kAllVariants) EXPECT_EQ(variant_from_string(to_string(v)), v);
  for (auto m : {BaseMethod::SGDA, BaseMethod::SEG, BaseMethod::OMD})
    EXPECT_EQ(base_method_from_string(to_string(m)), m);
  for (auto e : {ChainExecution::Sequential, ChainExecution::Threads, ChainExecution::Lockstep})
    EXPECT_EQ(chain_execution_from_string(to_string(e)), e);
  EXPECT_THROW(variant_from_string("richardson"), ParameterError);
}
