#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rrvi/errors.hpp"
#include "rrvi/problems.hpp"
#include "rrvi/samplers.hpp"

using namespace rrvi;

namespace {

FiniteSumProblem scalar_problem(std::vector<double> slopes, std::vector<double> offsets) {
  std::vector<Matrix> ms;
  std::vector<Vector> qs;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    ms.push_back(Matrix::Constant(1, 1, slopes[i]));
    qs.push_back(Vector::Constant(1, offsets[i]));
  }
  return FiniteSumProblem::affine(ProblemKind::GenericAffine, ms, qs);
}

}  // namespace

TEST(QuadraticGame, KappaOneHasIdentityDiagonalBlocks) {
  QuadraticGameSpec spec;
  spec.n = 100;
  spec.d = 100;
  spec.seed = 7;
  const auto p = generate_quadratic_game(spec);
  EXPECT_EQ(p.n(), 100u);
  EXPECT_EQ(p.d(), 200u);
  EXPECT_EQ(p.kind(), ProblemKind::QuadraticGame);
  for (std::size_t i : {0u, 37u, 99u}) {
    const Matrix& m = p.matrix(i);
    EXPECT_LT((m.topLeftCorner(100, 100) - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((m.bottomRightCorner(100, 100) - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff(),
              1e-12);
    // Coupling blocks: B in the upper right, -B' in the lower left.
    EXPECT_LT((m.topRightCorner(100, 100) + m.bottomLeftCorner(100, 100).transpose())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
  }
}

TEST(QuadraticGame, DecoupledScalarCase) {
  QuadraticGameSpec spec;
  spec.n = 1;
  spec.d = 1;
  spec.mu = 2;
  spec.L = 2;
  spec.coupling_max = 0;
  spec.offset_scale = 0;
  const auto p = generate_quadratic_game(spec);
  const Vector x = (Vector(2) << 0.3, -1.7).finished();
  EXPECT_NEAR(p.evaluate(0, x)(0), 0.6, 1e-15);
  EXPECT_NEAR(p.evaluate(0, x)(1), -3.4, 1e-15);
  EXPECT_LT(exact_solution(p).norm(), 1e-15);
}

TEST(QuadraticGame, SolutionResidual) {
  QuadraticGameSpec spec;
  spec.n = 4;
  spec.d = 2;
  spec.mu = 1;
  spec.L = 5;
  spec.seed = 3;
  const auto p = generate_quadratic_game(spec);
  const Vector xs = exact_solution(p);
  EXPECT_LE(p.mean_operator(xs).norm(), 1e-8 * (1.0 + p.mean_offset().norm()));
}

TEST(QuadraticGame, DiagonalSpectraLieInRange) {
  QuadraticGameSpec spec;
  spec.n = 5;
  spec.d = 6;
  spec.mu = 0.5;
  spec.L = 3;
  spec.coupling_max = 0.2;
  spec.seed = 11;
  for (bool resample : {false, true}) {
    spec.resample_basis = resample;
    const auto p = generate_quadratic_game(spec);
    for (std::size_t i = 0; i < p.n(); ++i) {
      const Matrix& m = p.matrix(i);
      for (const Matrix& blk : {Matrix(m.topLeftCorner(6, 6)), Matrix(m.bottomRightCorner(6, 6))}) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(blk);
        EXPECT_GE(es.eigenvalues().minCoeff(), 0.5 - 1e-12);
        EXPECT_LE(es.eigenvalues().maxCoeff(), 3.0 + 1e-12);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eb(Matrix(m.topRightCorner(6, 6)));
      EXPECT_GE(eb.eigenvalues().minCoeff(), -1e-12);
      EXPECT_LE(eb.eigenvalues().maxCoeff(), 0.2 + 1e-12);
    }
  }
}

TEST(QuadraticGame, SharedBasisComponentsCommute) {
  QuadraticGameSpec spec;
  spec.n = 3;
  spec.d = 4;
  spec.mu = 1;
  spec.L = 4;
  spec.seed = 5;
  const auto p = generate_quadratic_game(spec);
  const Matrix a0 = p.matrix(0).topLeftCorner(4, 4), a1 = p.matrix(1).topLeftCorner(4, 4);
  EXPECT_LT((a0 * a1 - a1 * a0).norm(), 1e-12);
}

TEST(QuadraticGame, DeterministicGivenSeed) {
  QuadraticGameSpec spec;
  spec.n = 6;
  spec.d = 5;
  spec.mu = 1;
  spec.L = 5;
  spec.seed = 42;
  const auto a = generate_quadratic_game(spec), b = generate_quadratic_game(spec);
  for (std::size_t i = 0; i < a.n(); ++i) {
    EXPECT_TRUE(a.matrix(i) == b.matrix(i));
    EXPECT_TRUE(a.offset(i) == b.offset(i));
  }
  spec.seed = 43;
  EXPECT_FALSE(generate_quadratic_game(spec).matrix(0) == a.matrix(0));
}

TEST(QuadraticGame, InvalidSpecs) {
  QuadraticGameSpec spec;
  spec.n = 2;
  spec.d = 2;
  spec.mu = 0;
  EXPECT_THROW(generate_quadratic_game(spec), ParameterError);
  spec.mu = 2;
  spec.L = 1;
  EXPECT_THROW(generate_quadratic_game(spec), ParameterError);
  spec.L = 2;
  spec.n = 0;
  EXPECT_THROW(generate_quadratic_game(spec), ParameterError);
  spec.n = 2;
  spec.d = 0;
  EXPECT_THROW(generate_quadratic_game(spec), ParameterError);
}

TEST(FiniteSum, MeanOperatorMatchesComponentAverage) {
  const auto p = oracle::random_affine(1, 7, 5);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const Vector x = oracle::random_vector(rng, 5);
    Vector avg = Vector::Zero(5);
    for (std::size_t i = 0; i < p.n(); ++i) avg += p.matrix(i) * x + p.offset(i);
    avg /= 7.0;
    EXPECT_LT((p.mean_operator(x) - avg).norm(), 1e-13 * (1.0 + avg.norm()));
  }
}

TEST(ExactSolution, TrivialSystems) {
  const auto zero = scalar_problem({1.0, 1.0}, {0.0, 0.0});
  EXPECT_EQ(exact_solution(zero)(0), 0.0);

  std::vector<Matrix> ms(2, 2.0 * Matrix::Identity(3, 3));
  std::vector<Vector> qs(2, Vector::Constant(3, -2.0));
  const auto p = FiniteSumProblem::affine(ProblemKind::GenericAffine, ms, qs);
  EXPECT_LT((exact_solution(p) - Vector::Ones(3)).norm(), 1e-15);
}

TEST(ExactSolution, MatchesFixedPointIteration) {
  const auto p = oracle::random_affine(6, 6, 4);
  const Vector ref = oracle::fixed_point(p, 0.2, 20000);
  EXPECT_LT((exact_solution(p) - ref).norm(), 1e-8);
}

TEST(ExactSolution, SingularMeanIsDegenerate) {
  std::vector<Matrix> ms{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  std::vector<Vector> qs{Vector::Ones(2), Vector::Ones(2)};
  const auto p = FiniteSumProblem::affine(ProblemKind::GenericAffine, ms, qs);
  EXPECT_THROW(exact_solution(p), DegenerateProblemError);
}

TEST(Wgan, SingleNoiselessSample) {
  const Vector x1 = (Vector(2) << 1.0, 0.0).finished();
  const auto p = make_wgan_problem_from_samples({x1}, {Vector::Zero(2)});
  const Vector xs = exact_solution(p);
  EXPECT_NEAR(xs(0), 1.0, 1e-15);
  EXPECT_NEAR(xs(1), 0.0, 1e-15);
  EXPECT_EQ(p.kind(), ProblemKind::ToyWGAN);
}

TEST(Wgan, SolutionIsEmpiricalMeanOfShiftedData) {
  const Vector target = (Vector(2) << 3.0, 4.0).finished();
  const auto p = make_wgan_problem(target, 0.1, 50, 11);
  // Rebuild the data with the same substreams to form the direct average.
  Vector avg = Vector::Zero(2);
  for (std::size_t j = 0; j < 50; ++j) {
    CounterRng rng(11, streams::kProblem, j + 1);
    const Vector x = target + std::sqrt(0.1) * normal_vector(rng, 2);
    const Vector z = normal_vector(rng, 2);
    avg += x - z;
  }
  avg /= 50.0;
  EXPECT_LT((exact_solution(p).head(2) - avg).norm(), 1e-12);
}

TEST(Wgan, InvalidCovariance) {
  EXPECT_THROW(make_wgan_problem(Vector::Ones(2), 0.0, 10, 1), ParameterError);
  EXPECT_THROW(make_wgan_problem(Vector::Ones(2), 1.0, 0, 1), ParameterError);
}

TEST(Constants, KappaOneZeroOffsets) {
  QuadraticGameSpec spec;
  spec.n = 10;
  spec.d = 3;
  spec.coupling_max = 0;
  spec.offset_scale = 0;
  const auto p = generate_quadratic_game(spec);
  const auto c = problem_constants(p, exact_solution(p));
  EXPECT_NEAR(c.L_max, 1.0, 1e-9);
  EXPECT_NEAR(c.mu, 1.0, 1e-12);
  EXPECT_EQ(c.sigma_star_sq, 0.0);
  EXPECT_EQ(c.lambda, 0.0);
}

TEST(Constants, SymmetricScalarOffsets) {
  const auto p = scalar_problem({1.0, 1.0}, {-1.0, 1.0});
  const Vector xs = exact_solution(p);
  EXPECT_EQ(xs(0), 0.0);
  const auto c = problem_constants(p, xs);
  EXPECT_DOUBLE_EQ(c.sigma_star_sq, 1.0);
  EXPECT_DOUBLE_EQ(c.sigma_star_4, 1.0);
}

TEST(Constants, PowerMeanAndLipschitz) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AffineProblemSpec spec;
    spec.n = 5;
    spec.d = 3;
    spec.seed = seed;
    const auto p = generate_affine_problem(spec);
    const Vector xs = exact_solution(p);
    const auto c = problem_constants(p, xs);
    EXPECT_GE(c.sigma_star_sq, 0.0);
    EXPECT_GE(c.sigma_star_4, c.sigma_star_sq * c.sigma_star_sq * (1.0 - 1e-12));
    double lmax = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
      EXPECT_NEAR(c.L_i[i], oracle::operator_norm(p.matrix(i)), 1e-8 * c.L_i[i]);
      lmax = std::max(lmax, c.L_i[i]);
    }
    EXPECT_EQ(c.L_max, lmax);
    EXPECT_NEAR(c.R, xs.norm(), 1e-15);
  }
}

TEST(Constants, QuasiStrongMonotonicity) {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto p = oracle::random_affine(100 + seed, 5, 4);
    const Vector xs = exact_solution(p);
    const auto c = problem_constants(p, xs);
    for (int t = 0; t < 1000; ++t) {
      const Vector x = xs + oracle::random_vector(rng, 4);
      const double lhs = p.mean_operator(x).dot(x - xs);
      const double rhs = c.mu * (x - xs).squaredNorm();
      EXPECT_GE(lhs, rhs - 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST(Constants, NonAffineNeedsUserConstants) {
  const auto p = FiniteSumProblem::custom(2, 1, [](std::size_t, const Vector& x, Vector& out) {
    out = x.array().cube().matrix();
  });
  EXPECT_THROW(problem_constants(p, Vector::Zero(1)), UnsupportedError);
  const auto c = problem_constants(p, Vector::Zero(1), {3.0, 4.0}, 0.5, 0.0);
  EXPECT_EQ(c.L_max, 4.0);
  EXPECT_EQ(c.mu, 0.5);
}

TEST(GammaMax, FrozenValues) {
  EXPECT_NEAR(gamma_max(100, 1, 1), 0.0013714594258871589, 1e-18);
  EXPECT_NEAR(gamma_max(1, 1, 1), 0.1371459425887159, 1e-16);
  EXPECT_NEAR(gamma_max(100, 1, 1), oracle::gamma_max(100, 1, 1), 1e-18);
}

TEST(GammaMax, NondecreasingInMu) {
  double prev = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double g = gamma_max(20, 0.1 * k, 1.0);
    EXPECT_GE(g, prev);
    EXPECT_NEAR(g, oracle::gamma_max(20, 0.1 * k, 1.0), 1e-18);
    prev = g;
  }
}

TEST(GammaMax, RejectsNonpositiveInputs) {
  EXPECT_THROW(gamma_max(0, 1, 1), ParameterError);
  EXPECT_THROW(gamma_max(1, 0, 1), ParameterError);
  EXPECT_THROW(gamma_max(1, 1, -1), ParameterError);
}

TEST(GammaMax, BiasBranchesAreTighter) {
  EXPECT_LE(gamma_max_bias(10, 0.5, 2.0), gamma_max(10, 0.5, 2.0));
  EXPECT_FALSE(violated_gamma_branch(10, 1, 1, gamma_max(10, 1, 1), false).has_value());
  const auto why = violated_gamma_branch(10, 1, 1, 1.0, false);
  ASSERT_TRUE(why.has_value());
  EXPECT_NE(why->find("1/(3 n L_max)"), std::string::npos);
  const auto bias = violated_gamma_branch(10, 1, 10, gamma_max(10, 1, 10), true);
  ASSERT_TRUE(bias.has_value());
  EXPECT_NE(bias->find("mu/(3 n L_max^2)"), std::string::npos);
}

TEST(GameValue, ZeroAtOriginAndSaddleStructure) {
  QuadraticGameSpec spec;
  spec.n = 3;
  spec.d = 2;
  spec.seed = 9;
  const auto p = generate_quadratic_game(spec);
  EXPECT_EQ(game_value(p, Vector::Zero(4)), 0.0);
  // f is convex in x1 and concave in x2 around the solution.
  const Vector xs = exact_solution(p);
  const double f0 = game_value(p, xs);
  Vector e1 = xs, e2 = xs;
  e1(0) += 0.1;
  e2(3) += 0.1;
  EXPECT_GT(game_value(p, e1), f0);
  EXPECT_LT(game_value(p, e2), f0);
  EXPECT_THROW(game_value(scalar_problem({1.0}, {0.0}), Vector::Zero(1)), UnsupportedError);
}
