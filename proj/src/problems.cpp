#include "rrvi/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rrvi/errors.hpp"
#include "rrvi/samplers.hpp"

namespace rrvi {

namespace {

Matrix random_orthogonal(CounterRng& rng, Eigen::Index d) {
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  // Fix column signs with diag(R) so the draw is Haar distributed.
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix conjugated_diagonal(CounterRng& rng, const Matrix& basis, double lo, double hi) {
  const Eigen::Index d = basis.rows();
  Vector diag(d);
  for (Eigen::Index j = 0; j < d; ++j) diag[j] = lo + (hi - lo) * rng.uniform01();
  return basis * diag.asDiagonal() * basis.transpose();
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::QuadraticGame:
      return "QuadraticGame";
    case ProblemKind::ToyWGAN:
      return "ToyWGAN";
    case ProblemKind::GenericAffine:
      return "GenericAffine";
    case ProblemKind::Custom:
      return "Custom";
  }
  return "?";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (auto k : {ProblemKind::QuadraticGame, ProblemKind::ToyWGAN,
                 ProblemKind::GenericAffine, ProblemKind::Custom}) {
    if (name == to_string(k)) return k;
  }
  throw ParameterError("unknown problem kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// FiniteSumProblem

FiniteSumProblem FiniteSumProblem::affine(ProblemKind kind, std::vector<Matrix> matrices,
                                          std::vector<Vector> offsets) {
  if (kind == ProblemKind::Custom) {
    throw ParameterError("affine problems cannot have kind Custom");
  }
  if (matrices.empty()) throw ParameterError("problem needs at least one component");
  if (matrices.size() != offsets.size()) {
    throw ParameterError("matrix and offset counts differ");
  }
  const Eigen::Index d = matrices.front().rows();
  if (d == 0) throw ParameterError("problem dimension must be positive");
  auto data = std::make_shared<AffineData>();
  data->mean_matrix = Matrix::Zero(d, d);
  data->mean_offset = Vector::Zero(d);
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    if (matrices[i].rows() != d || matrices[i].cols() != d || offsets[i].size() != d) {
      throw ParameterError("component " + std::to_string(i) + " has inconsistent shape");
    }
    if (!matrices[i].allFinite() || !offsets[i].allFinite()) {
      throw ParameterError("component " + std::to_string(i) + " has non-finite entries");
    }
    data->mean_matrix += matrices[i];
    data->mean_offset += offsets[i];
  }
  const double inv_n = 1.0 / static_cast<double>(matrices.size());
  data->mean_matrix *= inv_n;
  data->mean_offset *= inv_n;
  data->matrices = std::move(matrices);
  data->offsets = std::move(offsets);

  FiniteSumProblem p;
  p.kind_ = kind;
  p.n_ = data->matrices.size();
  p.d_ = static_cast<std::size_t>(d);
  p.affine_ = std::move(data);
  return p;
}

FiniteSumProblem FiniteSumProblem::custom(std::size_t n, std::size_t d,
                                          ComponentEvaluator evaluator) {
  if (n == 0 || d == 0) throw ParameterError("custom problem needs n, d > 0");
  if (!evaluator) throw ParameterError("custom problem needs an evaluator");
  FiniteSumProblem p;
  p.kind_ = ProblemKind::Custom;
  p.n_ = n;
  p.d_ = d;
  p.evaluator_ = std::move(evaluator);
  return p;
}

FiniteSumProblem FiniteSumProblem::with_metadata(std::uint64_t seed,
                                                 std::string spec_json) const {
  FiniteSumProblem p = *this;
  p.seed_ = seed;
  p.spec_json_ = std::move(spec_json);
  return p;
}

const FiniteSumProblem::AffineData& FiniteSumProblem::affine_data() const {
  if (!affine_) throw UnsupportedError("operation requires an affine problem");
  return *affine_;
}

void FiniteSumProblem::evaluate(std::size_t i, const Vector& x, Vector& out) const {
  if (affine_) {
    out.noalias() = affine_->matrices[i] * x;
    out += affine_->offsets[i];
  } else {
    evaluator_(i, x, out);
  }
}

Vector FiniteSumProblem::evaluate(std::size_t i, const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(d_));
  evaluate(i, x, out);
  return out;
}

Vector FiniteSumProblem::mean_operator(const Vector& x) const {
  if (affine_) return affine_->mean_matrix * x + affine_->mean_offset;
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(d_));
  Vector tmp(static_cast<Eigen::Index>(d_));
  for (std::size_t i = 0; i < n_; ++i) {
    evaluate(i, x, tmp);
    sum += tmp;
  }
  return sum / static_cast<double>(n_);
}

const Matrix& FiniteSumProblem::matrix(std::size_t i) const { return affine_data().matrices.at(i); }
const Vector& FiniteSumProblem::offset(std::size_t i) const { return affine_data().offsets.at(i); }
const Matrix& FiniteSumProblem::mean_matrix() const { return affine_data().mean_matrix; }
const Vector& FiniteSumProblem::mean_offset() const { return affine_data().mean_offset; }

// ---------------------------------------------------------------------------
// Generators

FiniteSumProblem make_saddle_problem(const std::vector<Matrix>& A, const std::vector<Matrix>& B,
                                     const std::vector<Matrix>& C, const std::vector<Vector>& a,
                                     const std::vector<Vector>& c, ProblemKind kind) {
  const std::size_t n = A.size();
  if (n == 0 || B.size() != n || C.size() != n || a.size() != n || c.size() != n) {
    throw ParameterError("saddle problem blocks must all have n entries");
  }
  const Eigen::Index d = A.front().rows();
  std::vector<Matrix> matrices(n);
  std::vector<Vector> offsets(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix m(2 * d, 2 * d);
    m.topLeftCorner(d, d) = A[i];
    m.topRightCorner(d, d) = B[i];
    m.bottomLeftCorner(d, d) = -B[i].transpose();
    m.bottomRightCorner(d, d) = C[i];
    Vector q(2 * d);
    q.head(d) = a[i];
    q.tail(d) = -c[i];
    matrices[i] = std::move(m);
    offsets[i] = std::move(q);
  }
  return FiniteSumProblem::affine(kind, std::move(matrices), std::move(offsets));
}

FiniteSumProblem generate_quadratic_game(const QuadraticGameSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw ParameterError("quadratic game needs n, d > 0");
  if (!(spec.mu > 0.0)) throw ParameterError("quadratic game needs mu > 0");
  if (!(spec.L >= spec.mu)) throw ParameterError("quadratic game needs L >= mu");
  if (!(spec.coupling_max >= 0.0)) throw ParameterError("coupling_max must be nonnegative");
  if (!(spec.offset_scale >= 0.0)) throw ParameterError("offset_scale must be nonnegative");

  const auto d = static_cast<Eigen::Index>(spec.d);
  CounterRng basis_rng(spec.seed, streams::kProblem, 0);
  Matrix pa = random_orthogonal(basis_rng, d);
  Matrix pb = random_orthogonal(basis_rng, d);
  Matrix pc = random_orthogonal(basis_rng, d);

  std::vector<Matrix> A(spec.n), B(spec.n), C(spec.n);
  std::vector<Vector> a(spec.n), c(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    // One substream per component so the draw for component i does not
    // depend on how the others were generated.
    CounterRng rng(spec.seed, streams::kProblem, i + 1);
    if (spec.resample_basis) {
      pa = random_orthogonal(rng, d);
      pb = random_orthogonal(rng, d);
      pc = random_orthogonal(rng, d);
    }
    A[i] = conjugated_diagonal(rng, pa, spec.mu, spec.L);
    B[i] = conjugated_diagonal(rng, pb, 0.0, spec.coupling_max);
    C[i] = conjugated_diagonal(rng, pc, spec.mu, spec.L);
    a[i] = spec.offset_scale * normal_vector(rng, d);
    c[i] = spec.offset_scale * normal_vector(rng, d);
  }

  nlohmann::json meta = {{"n", spec.n},
                         {"d", spec.d},
                         {"mu", spec.mu},
                         {"L", spec.L},
                         {"coupling_max", spec.coupling_max},
                         {"offset_scale", spec.offset_scale},
                         {"resample_basis", spec.resample_basis}};
  return make_saddle_problem(A, B, C, a, c).with_metadata(spec.seed, meta.dump());
}

FiniteSumProblem generate_affine_problem(const AffineProblemSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw ParameterError("affine problem needs n, d > 0");
  const auto d = static_cast<Eigen::Index>(spec.d);
  std::vector<Matrix> matrices(spec.n);
  std::vector<Vector> offsets(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    CounterRng rng(spec.seed, streams::kProblem, i + 1);
    Matrix g(d, d), h(d, d);
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index r = 0; r < d; ++r) {
        g(r, c) = rng.normal();
        h(r, c) = rng.normal();
      }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Matrix sym = 0.5 * (g + g.transpose()) * scale;
    Matrix skew = 0.5 * (h - h.transpose()) * scale;
    matrices[i] = spec.shift * Matrix::Identity(d, d) + spec.sym_spread * sym +
                  spec.skew_spread * skew;
    offsets[i] = spec.offset_scale * normal_vector(rng, d);
  }
  nlohmann::json meta = {{"n", spec.n},
                         {"d", spec.d},
                         {"shift", spec.shift},
                         {"sym_spread", spec.sym_spread},
                         {"skew_spread", spec.skew_spread},
                         {"offset_scale", spec.offset_scale}};
  return FiniteSumProblem::affine(ProblemKind::GenericAffine, std::move(matrices),
                                  std::move(offsets))
      .with_metadata(spec.seed, meta.dump());
}

Vector exact_solution(const FiniteSumProblem& problem) {
  if (!problem.is_affine()) throw UnsupportedError("exact_solution requires an affine problem");
  const Matrix& m = problem.mean_matrix();
  const Vector& q = problem.mean_offset();
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    std::ostringstream os;
    os << "mean operator is singular (condition estimate " << (rcond > 0 ? 1.0 / rcond : INFINITY)
       << ")";
    throw DegenerateProblemError(os.str());
  }
  Vector x = lu.solve(-q);
  // One step of iterative refinement.
  Vector r = m * x + q;
  x -= lu.solve(r);
  return x;
}

FiniteSumProblem make_wgan_problem_from_samples(const std::vector<Vector>& data,
                                                const std::vector<Vector>& noise) {
  if (data.empty()) throw ParameterError("wgan problem needs at least one sample");
  if (noise.size() != data.size()) throw ParameterError("wgan data/noise counts differ");
  const Eigen::Index p = data.front().size();
  // F_j(theta, w) = (-w, theta - (x_j - z_j)): the operator of
  // inf_theta sup_w <w, x_j> - <w, z_j + theta>.
  Matrix m = Matrix::Zero(2 * p, 2 * p);
  m.topRightCorner(p, p) = -Matrix::Identity(p, p);
  m.bottomLeftCorner(p, p) = Matrix::Identity(p, p);
  std::vector<Matrix> matrices(data.size(), m);
  std::vector<Vector> offsets(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (data[j].size() != p || noise[j].size() != p) {
      throw ParameterError("wgan samples must share one dimension");
    }
    Vector q = Vector::Zero(2 * p);
    q.tail(p) = -(data[j] - noise[j]);
    offsets[j] = std::move(q);
  }
  return FiniteSumProblem::affine(ProblemKind::ToyWGAN, std::move(matrices), std::move(offsets));
}

FiniteSumProblem make_wgan_problem(const Vector& target_mean, double cov_scale,
                                   std::size_t m_samples, std::uint64_t seed) {
  if (m_samples == 0) throw ParameterError("wgan problem needs m_samples >= 1");
  if (!(cov_scale > 0.0)) throw ParameterError("wgan cov_scale must be positive");
  if (target_mean.size() == 0) throw ParameterError("wgan target mean must be nonempty");
  const double sd = std::sqrt(cov_scale);
  std::vector<Vector> data(m_samples), noise(m_samples);
  for (std::size_t j = 0; j < m_samples; ++j) {
    CounterRng rng(seed, streams::kProblem, j + 1);
    data[j] = target_mean + sd * normal_vector(rng, target_mean.size());
    noise[j] = normal_vector(rng, target_mean.size());
  }
  nlohmann::json meta = {{"target_mean", std::vector<double>(target_mean.data(),
                                                              target_mean.data() + target_mean.size())},
                         {"cov_scale", cov_scale},
                         {"m_samples", m_samples}};
  return make_wgan_problem_from_samples(data, noise).with_metadata(seed, meta.dump());
}

// ---------------------------------------------------------------------------
// Constants

double spectral_norm(const Matrix& m, double rel_tol, int max_iter) {
  if (m.size() == 0) return 0.0;
  if (m.isZero(0.0)) return 0.0;
  CounterRng rng(0x5eed, 0, static_cast<std::uint64_t>(m.cols()));
  Vector v = normal_vector(rng, m.cols());
  v.normalize();
  double lambda = 0.0;
  Vector mv(m.rows());
  for (int it = 0; it < max_iter; ++it) {
    mv.noalias() = m * v;
    Vector w = m.transpose() * mv;
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

namespace {

void fill_moments(const FiniteSumProblem& problem, const Vector& x_star, ProblemConstants& c) {
  double s2 = 0.0, s4 = 0.0;
  Vector f(static_cast<Eigen::Index>(problem.d()));
  for (std::size_t i = 0; i < problem.n(); ++i) {
    problem.evaluate(i, x_star, f);
    const double sq = f.squaredNorm();
    s2 += sq;
    s4 += sq * sq;
  }
  const double n = static_cast<double>(problem.n());
  c.sigma_star_sq = s2 / n;
  c.sigma_star_4 = s4 / n;
  c.x_star = x_star;
  c.R = x_star.norm();
}

}  // namespace

ProblemConstants problem_constants(const FiniteSumProblem& problem, const Vector& x_star) {
  if (!problem.is_affine()) {
    throw UnsupportedError("problem_constants: non-affine problems need user-supplied constants");
  }
  if (x_star.size() != static_cast<Eigen::Index>(problem.d())) {
    throw ParameterError("problem_constants: x_star has the wrong dimension");
  }
  ProblemConstants c;
  c.L_i.resize(problem.n());
  for (std::size_t i = 0; i < problem.n(); ++i) c.L_i[i] = spectral_norm(problem.matrix(i));
  c.L_max = *std::max_element(c.L_i.begin(), c.L_i.end());
  Matrix sym = 0.5 * (problem.mean_matrix() + problem.mean_matrix().transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  c.mu = es.eigenvalues().minCoeff();
  c.lambda = 0.0;
  fill_moments(problem, x_star, c);
  return c;
}

ProblemConstants problem_constants(const FiniteSumProblem& problem, const Vector& x_star,
                                   std::vector<double> L_i, double mu, double lambda) {
  if (L_i.size() != problem.n()) throw ParameterError("problem_constants: need one L_i per component");
  ProblemConstants c;
  c.L_i = std::move(L_i);
  c.L_max = *std::max_element(c.L_i.begin(), c.L_i.end());
  c.mu = mu;
  c.lambda = lambda;
  fill_moments(problem, x_star, c);
  return c;
}

namespace {

void check_gamma_inputs(std::size_t n, double mu, double L_max) {
  if (n == 0) throw ParameterError("gamma_max: n must be positive");
  if (!(mu > 0.0)) throw ParameterError("gamma_max: mu must be positive");
  if (!(L_max > 0.0)) throw ParameterError("gamma_max: L_max must be positive");
}

struct Branch {
  const char* name;
  double value;
};

std::vector<Branch> gamma_branches(std::size_t n, double mu, double L, bool bias) {
  const double nn = static_cast<double>(n);
  std::vector<Branch> b = {
      {"1/(3 n L_max)", 1.0 / (3.0 * nn * L)},
      {"(sqrt(1 + 6 mu^2 L_max^2) - 1)/(12 n L_max^2)",
       (std::sqrt(1.0 + 6.0 * mu * mu * L * L) - 1.0) / (12.0 * nn * L * L)}};
  if (bias) {
    b.push_back({"mu/(3 n L_max^2)", mu / (3.0 * nn * L * L)});
    b.push_back({"mu^(3/5)/(8 n L_max^(3/5))",
                 std::pow(mu, 0.6) / (8.0 * nn * std::pow(L, 0.6))});
  }
  return b;
}

}  // namespace

double gamma_max(std::size_t n, double mu, double L_max) {
  check_gamma_inputs(n, mu, L_max);
  double g = INFINITY;
  for (const auto& b : gamma_branches(n, mu, L_max, false)) g = std::min(g, b.value);
  return g;
}

double gamma_max_bias(std::size_t n, double mu, double L_max) {
  check_gamma_inputs(n, mu, L_max);
  double g = INFINITY;
  for (const auto& b : gamma_branches(n, mu, L_max, true)) g = std::min(g, b.value);
  return g;
}

std::optional<std::string> violated_gamma_branch(std::size_t n, double mu, double L_max,
                                                 double gamma, bool bias_branches) {
  check_gamma_inputs(n, mu, L_max);
  for (const auto& b : gamma_branches(n, mu, L_max, bias_branches)) {
    if (gamma > b.value) {
      std::ostringstream os;
      os.precision(17);
      os << "gamma=" << gamma << " exceeds " << b.name << " = " << b.value;
      return os.str();
    }
  }
  return std::nullopt;
}

double game_value(const FiniteSumProblem& problem, const Vector& x) {
  if (!problem.is_affine()) throw UnsupportedError("game_value requires an affine problem");
  if (problem.d() % 2 != 0) throw UnsupportedError("game_value requires an even joint dimension");
  const auto h = static_cast<Eigen::Index>(problem.d() / 2);
  const Matrix& m = problem.mean_matrix();
  const Vector& q = problem.mean_offset();
  const auto x1 = x.head(h);
  const auto x2 = x.tail(h);
  const double quad1 = 0.5 * x1.dot(m.topLeftCorner(h, h) * x1);
  const double quad2 = 0.5 * x2.dot(m.bottomRightCorner(h, h) * x2);
  const double cross = x1.dot(m.topRightCorner(h, h) * x2);
  return quad1 + cross - quad2 + q.head(h).dot(x1) - q.tail(h).dot(x2);
}

}  // namespace rrvi
