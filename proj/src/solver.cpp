#include "rrvi/solver.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "rrvi/errors.hpp"

namespace rrvi {

const char* to_string(BaseMethod m) {
  switch (m) {
    case BaseMethod::SGDA:
      return "sgda";
    case BaseMethod::SEG:
      return "seg";
    case BaseMethod::OMD:
      return "omd";
  }
  return "?";
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Plain:
      return "plain";
    case Variant::RRresh:
      return "rrresh";
    case Variant::RRrom:
      return "rrrom";
    case Variant::RRromRRresh:
      return "rrrom-rrresh";
  }
  return "?";
}

const char* to_string(ChainExecution e) {
  switch (e) {
    case ChainExecution::Sequential:
      return "sequential";
    case ChainExecution::Threads:
      return "threads";
    case ChainExecution::Lockstep:
      return "lockstep";
  }
  return "?";
}

BaseMethod base_method_from_string(const std::string& name) {
  for (auto m : {BaseMethod::SGDA, BaseMethod::SEG, BaseMethod::OMD})
    if (name == to_string(m)) return m;
  throw ParameterError("unknown base method '" + name + "'");
}

Variant variant_from_string(const std::string& name) {
  for (auto v : {Variant::Plain, Variant::RRresh, Variant::RRrom, Variant::RRromRRresh})
    if (name == to_string(v)) return v;
  throw ParameterError("unknown variant '" + name + "'");
}

ChainExecution chain_execution_from_string(const std::string& name) {
  for (auto e : {ChainExecution::Sequential, ChainExecution::Threads, ChainExecution::Lockstep})
    if (name == to_string(e)) return e;
  throw ParameterError("unknown chain execution mode '" + name + "'");
}

bool is_extrapolated(Variant v) { return v == Variant::RRrom || v == Variant::RRromRRresh; }
bool is_reshuffled(Variant v) { return v == Variant::RRresh || v == Variant::RRromRRresh; }

// ---------------------------------------------------------------------------
// Chain

Chain::Chain(const FiniteSumProblem& problem, BaseMethod method, double step, Vector x0)
    : problem_(&problem), method_(method), step_(step), x_(std::move(x0)) {
  const auto d = static_cast<Eigen::Index>(problem.d());
  if (x_.size() != d) throw ParameterError("initial point has the wrong dimension");
  next_.resize(d);
  g_.resize(d);
  half_.resize(d);
  prev_g_.resize(d);
}

void Chain::set_state(const Vector& x) {
  if (x.size() != x_.size()) throw ParameterError("state has the wrong dimension");
  x_ = x;
  has_prev_ = false;
}

void Chain::step(std::size_t i) {
  switch (method_) {
    case BaseMethod::SGDA:
      problem_->evaluate(i, x_, g_);
      next_ = x_ - step_ * g_;
      break;
    case BaseMethod::SEG:
      problem_->evaluate(i, x_, g_);
      half_ = x_ - step_ * g_;
      problem_->evaluate(i, half_, g_);
      next_ = x_ - step_ * g_;
      break;
    case BaseMethod::OMD:
      problem_->evaluate(i, x_, g_);
      if (!has_prev_) prev_g_ = g_;
      next_ = x_ - step_ * (2.0 * g_ - prev_g_);
      prev_g_ = g_;
      has_prev_ = true;
      break;
  }
  commit(i);
}

void Chain::commit(std::size_t i) {
  ++steps_;
  if (is_diverged(next_)) {
    throw DivergenceError("iterate diverged at inner step " + std::to_string(steps_) +
                              " (component " + std::to_string(i) + ")",
                          x_, steps_);
  }
  x_.swap(next_);
}

void Chain::run_epoch(const std::vector<std::size_t>& indices, CounterRng* noise,
                      double epoch_noise_sd, double inner_noise_sd, std::vector<Vector>* inner) {
  if (inner) inner->clear();
  for (auto i : indices) {
    step(i);
    if (noise && inner_noise_sd > 0.0) {
      for (Eigen::Index c = 0; c < x_.size(); ++c) x_[c] += inner_noise_sd * noise->normal();
    }
    if (inner) inner->push_back(x_);
  }
  if (noise && epoch_noise_sd > 0.0) {
    for (Eigen::Index c = 0; c < x_.size(); ++c) x_[c] += epoch_noise_sd * noise->normal();
  }
}

// ---------------------------------------------------------------------------
// Single-epoch operations

EpochResult epoch_pass(const FiniteSumProblem& problem, const Vector& x, double gamma,
                       const Permutation& perm) {
  if (!is_permutation_of_range(perm, problem.n())) {
    throw ParameterError("epoch_pass: perm is not a permutation of the components");
  }
  Chain chain(problem, BaseMethod::SGDA, gamma, x);
  EpochResult r;
  r.inner.reserve(perm.size());
  chain.run_epoch(perm, nullptr, 0.0, 0.0, &r.inner);
  r.endpoint = chain.state();
  return r;
}

double perturbation_sd(double gamma, std::size_t n, std::size_t d, double sigma_star_sq,
                       double noise_scale) {
  const double nn = static_cast<double>(n);
  return std::sqrt(noise_scale * gamma * gamma * nn * nn * sigma_star_sq / static_cast<double>(d));
}

Vector perturb(const Vector& x, double gamma, std::size_t n, double sigma_star_sq,
               double noise_scale, CounterRng& rng) {
  if (!(sigma_star_sq >= 0.0)) throw ParameterError("perturb: sigma_star_sq must be nonnegative");
  if (!(noise_scale >= 0.0)) throw ParameterError("perturb: noise_scale must be nonnegative");
  const double sd =
      perturbation_sd(gamma, n, static_cast<std::size_t>(x.size()), sigma_star_sq, noise_scale);
  if (sd == 0.0) return x;
  Vector out = x;
  for (Eigen::Index c = 0; c < out.size(); ++c) out[c] += sd * rng.normal();
  return out;
}

Vector extrapolate_last(const Vector& x_gamma, const Vector& x_two_gamma) {
  if (x_gamma.size() != x_two_gamma.size()) {
    throw ParameterError("extrapolate_last: dimension mismatch");
  }
  return 2.0 * x_gamma - x_two_gamma;
}

Vector extrapolate_average(const Vector& sum_gamma, const Vector& sum_two_gamma, std::size_t k) {
  if (k == 0) throw ParameterError("extrapolate_average: k must be at least 1");
  if (sum_gamma.size() != sum_two_gamma.size()) {
    throw ParameterError("extrapolate_average: dimension mismatch");
  }
  return (2.0 * sum_gamma - sum_two_gamma) / static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Runs

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t hash_indices(const std::vector<std::size_t>& idx) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto i : idx) h = mix64(h ^ (static_cast<std::uint64_t>(i) + 0x9e3779b97f4a7c15ULL));
  return h;
}

struct NoiseParams {
  double epoch_sd = 0.0;
  double inner_sd = 0.0;
  bool active() const { return epoch_sd > 0.0 || inner_sd > 0.0; }
};

NoiseParams noise_for(const RunConfig& cfg, std::size_t n, std::size_t d, double step,
                      double sigma_sq) {
  NoiseParams p;
  if (!cfg.perturb) return p;
  if (cfg.inner_noise) {
    // n per-step draws add up to the epoch-level variance.
    p.inner_sd = perturbation_sd(step, n, d, sigma_sq, cfg.noise_scale) /
                 std::sqrt(static_cast<double>(n));
  } else {
    p.epoch_sd = perturbation_sd(step, n, d, sigma_sq, cfg.noise_scale);
  }
  return p;
}

void record_epoch(Trajectory& t, const Vector& x, const std::optional<Vector>& x_star) {
  t.epoch_iterates.push_back(x);
  if (x_star) t.per_epoch_error.push_back((x - *x_star).squaredNorm());
}

Trajectory run_chain(const FiniteSumProblem& problem, const RunConfig& cfg, double step,
                     SamplingPlan plan, const Vector& x0, const NoiseParams& noise,
                     const std::optional<Vector>& x_star) {
  Trajectory t;
  t.step_size = step;
  t.epoch_iterates.reserve(cfg.epochs + 1);
  record_epoch(t, x0, x_star);
  t.epoch_wall_ms.push_back(0.0);
  Chain chain(problem, cfg.base_method, step, x0);
  const auto t0 = Clock::now();
  std::vector<Vector> inner;
  for (std::size_t k = 0; k < cfg.epochs; ++k) {
    const std::uint64_t epoch_id = plan.epoch_counter();
    const auto idx = plan.next_epoch(problem.n());
    t.epoch_index_hash.push_back(hash_indices(idx));
    CounterRng rng = plan.noise_rng(epoch_id);
    try {
      chain.run_epoch(idx, noise.active() ? &rng : nullptr, noise.epoch_sd, noise.inner_sd,
                      cfg.record_inner ? &inner : nullptr);
    } catch (const DivergenceError& e) {
      t.status = RunStatus::Diverged;
      t.diverged_epoch = k;
      t.message = e.what();
      break;
    }
    if (is_diverged(chain.state())) {
      t.status = RunStatus::Diverged;
      t.diverged_epoch = k;
      t.message = "perturbed iterate diverged";
      break;
    }
    record_epoch(t, chain.state(), x_star);
    if (cfg.record_inner) t.inner_iterates.push_back(inner);
    t.epoch_wall_ms.push_back(ms_since(t0));
  }
  t.wall_time = ms_since(t0) / 1000.0;
  return t;
}

/// Both chains in one loop over shared indices, two columns per product.
std::pair<Trajectory, Trajectory> run_lockstep(const FiniteSumProblem& problem,
                                               const RunConfig& cfg, SamplingPlan plan,
                                               const Vector& x0, const NoiseParams& noise_g,
                                               const NoiseParams& noise_2g,
                                               const std::optional<Vector>& x_star) {
  using Pair = Eigen::Matrix<double, Eigen::Dynamic, 2>;
  const auto d = static_cast<Eigen::Index>(problem.d());
  const double steps[2] = {cfg.gamma, 2.0 * cfg.gamma};
  const NoiseParams* noise[2] = {&noise_g, &noise_2g};
  Trajectory t[2];
  for (int c = 0; c < 2; ++c) {
    t[c].step_size = steps[c];
    t[c].epoch_iterates.reserve(cfg.epochs + 1);
    record_epoch(t[c], x0, x_star);
    t[c].epoch_wall_ms.push_back(0.0);
  }
  Pair x(d, 2), g(d, 2), half(d, 2), prev(d, 2), next(d, 2);
  x.col(0) = x0;
  x.col(1) = x0;
  bool has_prev = false;
  const Eigen::Array2d step_arr(steps[0], steps[1]);
  auto eval = [&](std::size_t i, const Pair& at, Pair& out) {
    if (problem.is_affine()) {
      // One sweep over the columns of M_i feeds both chains.
      const Matrix& m = problem.matrix(i);
      const double* q = problem.offset(i).data();
      double* o0 = out.col(0).data();
      double* o1 = out.col(1).data();
      for (Eigen::Index r = 0; r < d; ++r) o0[r] = o1[r] = q[r];
      // Four columns per sweep keep the loads of M ahead of the stores to out.
      Eigen::Index j = 0;
      for (; j + 4 <= d; j += 4) {
        const double* m0 = m.col(j).data();
        const double* m1 = m.col(j + 1).data();
        const double* m2 = m.col(j + 2).data();
        const double* m3 = m.col(j + 3).data();
        const double a0 = at(j, 0), a1 = at(j + 1, 0), a2 = at(j + 2, 0), a3 = at(j + 3, 0);
        const double b0 = at(j, 1), b1 = at(j + 1, 1), b2 = at(j + 2, 1), b3 = at(j + 3, 1);
        for (Eigen::Index r = 0; r < d; ++r) {
          const double v0 = m0[r], v1 = m1[r], v2 = m2[r], v3 = m3[r];
          o0[r] += v0 * a0 + v1 * a1 + v2 * a2 + v3 * a3;
          o1[r] += v0 * b0 + v1 * b1 + v2 * b2 + v3 * b3;
        }
      }
      for (; j < d; ++j) {
        const double* mj = m.col(j).data();
        const double a0 = at(j, 0), b0 = at(j, 1);
        for (Eigen::Index r = 0; r < d; ++r) {
          o0[r] += mj[r] * a0;
          o1[r] += mj[r] * b0;
        }
      }
    } else {
      Vector tmp(d);
      for (int c = 0; c < 2; ++c) {
        problem.evaluate(i, at.col(c), tmp);
        out.col(c) = tmp;
      }
    }
  };
  const bool record_inner = cfg.record_inner;
  std::vector<Vector> inner[2];
  const auto t0 = Clock::now();
  bool diverged = false;
  for (std::size_t k = 0; k < cfg.epochs && !diverged; ++k) {
    const std::uint64_t epoch_id = plan.epoch_counter();
    const auto idx = plan.next_epoch(problem.n());
    const auto h = hash_indices(idx);
    // Each chain draws its noise from its own copy of the shared stream, as
    // it would when run on its own.
    CounterRng rng[2] = {plan.noise_rng(epoch_id), plan.noise_rng(epoch_id)};
    if (record_inner) {
      inner[0].clear();
      inner[1].clear();
    }
    for (auto i : idx) {
      switch (cfg.base_method) {
        case BaseMethod::SGDA:
          eval(i, x, g);
          next = x - (g.array().rowwise() * step_arr.transpose()).matrix();
          break;
        case BaseMethod::SEG:
          eval(i, x, g);
          half = x - (g.array().rowwise() * step_arr.transpose()).matrix();
          eval(i, half, g);
          next = x - (g.array().rowwise() * step_arr.transpose()).matrix();
          break;
        case BaseMethod::OMD:
          eval(i, x, g);
          if (!has_prev) prev = g;
          next = x - ((2.0 * g - prev).array().rowwise() * step_arr.transpose()).matrix();
          prev = g;
          has_prev = true;
          break;
      }
      for (int c = 0; c < 2; ++c) {
        if (noise[c]->inner_sd > 0.0) {
          for (Eigen::Index r = 0; r < d; ++r) next(r, c) += noise[c]->inner_sd * rng[c].normal();
        }
      }
      if (!next.allFinite() || next.col(0).norm() > kDivergenceNorm ||
          next.col(1).norm() > kDivergenceNorm) {
        for (int c = 0; c < 2; ++c) {
          t[c].status = RunStatus::Diverged;
          t[c].diverged_epoch = k;
          t[c].message = "iterate diverged (lockstep pair)";
        }
        diverged = true;
        break;
      }
      x.swap(next);
      if (record_inner) {
        inner[0].push_back(x.col(0));
        inner[1].push_back(x.col(1));
      }
    }
    if (diverged) break;
    for (int c = 0; c < 2; ++c) {
      if (noise[c]->epoch_sd > 0.0) {
        for (Eigen::Index r = 0; r < d; ++r) x(r, c) += noise[c]->epoch_sd * rng[c].normal();
      }
      t[c].epoch_index_hash.push_back(h);
      record_epoch(t[c], x.col(c), x_star);
      if (record_inner) t[c].inner_iterates.push_back(inner[c]);
    }
    const double ms = ms_since(t0);
    t[0].epoch_wall_ms.push_back(ms);
    t[1].epoch_wall_ms.push_back(ms);
  }
  const double secs = ms_since(t0) / 1000.0;
  t[0].wall_time = secs;
  t[1].wall_time = secs;
  return {std::move(t[0]), std::move(t[1])};
}

void check_plan(const SamplingPlan& plan, Variant v) {
  const bool withrep = plan.mode() == SamplingMode::WithReplacement;
  if (is_reshuffled(v) && withrep) {
    throw ParameterError(std::string("variant ") + to_string(v) +
                         " needs a reshuffle plan, got with-replacement");
  }
  if (!is_reshuffled(v) && !withrep) {
    throw ParameterError(std::string("variant ") + to_string(v) +
                         " needs a with-replacement plan, got " + to_string(plan.mode()));
  }
}

}  // namespace

CoupledPlans plans_for(const RunConfig& config) {
  SamplingMode mode = SamplingMode::WithReplacement;
  if (is_reshuffled(config.variant)) {
    mode = config.fixed_order ? SamplingMode::FixedOrder : SamplingMode::Reshuffle;
  }
  return make_coupled(config.seed, mode, config.independent_perms);
}

bool RunResult::diverged() const {
  return primary.status == RunStatus::Diverged ||
         (companion && companion->status == RunStatus::Diverged);
}

Vector RunResult::final_iterate() const {
  if (companion && !extrap_last.empty()) return extrap_last.back();
  return primary.epoch_iterates.back();
}

const std::vector<double>& RunResult::error_curve() const {
  return companion ? err_extrap_last : primary.per_epoch_error;
}

RunResult run_variant(const FiniteSumProblem& problem, const RunConfig& config,
                      const CoupledPlans& plans) {
  if (!(config.gamma >= 0.0) || !std::isfinite(config.gamma)) {
    throw ParameterError("run_variant: gamma must be finite and nonnegative");
  }
  if (!(config.noise_scale >= 0.0)) throw ParameterError("run_variant: noise_scale must be >= 0");
  check_plan(plans.plan_gamma, config.variant);
  const bool extrap = is_extrapolated(config.variant);
  if (extrap) check_plan(plans.plan_two_gamma, config.variant);

  const auto d = static_cast<Eigen::Index>(problem.d());
  const Vector x0 = config.x0.size() == 0 ? Vector::Zero(d) : config.x0;
  if (x0.size() != d) throw ParameterError("run_variant: x0 has the wrong dimension");

  RunResult result;
  result.variant = config.variant;
  if (config.x_star) {
    result.x_star = config.x_star;
  } else if (problem.is_affine()) {
    try {
      result.x_star = exact_solution(problem);
    } catch (const DegenerateProblemError&) {
    }
  }

  double sigma_sq = 0.0;
  if (config.perturb) {
    if (config.sigma_star_sq) {
      sigma_sq = *config.sigma_star_sq;
    } else if (result.x_star) {
      Vector f(d);
      for (std::size_t i = 0; i < problem.n(); ++i) {
        problem.evaluate(i, *result.x_star, f);
        sigma_sq += f.squaredNorm();
      }
      sigma_sq /= static_cast<double>(problem.n());
    } else {
      throw ParameterError("run_variant: perturbation needs sigma*^2 or a known solution");
    }
    if (!(sigma_sq >= 0.0)) throw ParameterError("run_variant: sigma*^2 must be nonnegative");
  }

  const std::size_t n = problem.n();
  const NoiseParams noise_g = noise_for(config, n, problem.d(), config.gamma, sigma_sq);
  const NoiseParams noise_2g = noise_for(config, n, problem.d(), 2.0 * config.gamma, sigma_sq);

  const auto t0 = Clock::now();
  if (!extrap) {
    result.primary = run_chain(problem, config, config.gamma, plans.plan_gamma, x0, noise_g,
                               result.x_star);
    result.epoch_wall_ms = result.primary.epoch_wall_ms;
  } else {
    switch (config.execution) {
      case ChainExecution::Sequential:
        result.primary = run_chain(problem, config, config.gamma, plans.plan_gamma, x0, noise_g,
                                   result.x_star);
        result.companion = run_chain(problem, config, 2.0 * config.gamma, plans.plan_two_gamma,
                                     x0, noise_2g, result.x_star);
        break;
      case ChainExecution::Threads: {
        Trajectory companion;
        std::exception_ptr failure;
        std::thread worker([&] {
          try {
            companion = run_chain(problem, config, 2.0 * config.gamma, plans.plan_two_gamma, x0,
                                  noise_2g, result.x_star);
          } catch (...) {
            failure = std::current_exception();
          }
        });
        try {
          result.primary = run_chain(problem, config, config.gamma, plans.plan_gamma, x0,
                                     noise_g, result.x_star);
        } catch (...) {
          worker.join();
          throw;
        }
        worker.join();
        if (failure) std::rethrow_exception(failure);
        result.companion = std::move(companion);
        break;
      }
      case ChainExecution::Lockstep: {
        if (!plans.coupled()) {
          throw ParameterError("lockstep execution needs coupled sampling plans");
        }
        auto [a, b] = run_lockstep(problem, config, plans.plan_gamma, x0, noise_g, noise_2g,
                                   result.x_star);
        result.primary = std::move(a);
        result.companion = std::move(b);
        break;
      }
    }
    const Trajectory& tg = result.primary;
    const Trajectory& t2 = *result.companion;
    if (plans.coupled()) {
      const std::size_t m = std::min(tg.epoch_index_hash.size(), t2.epoch_index_hash.size());
      for (std::size_t k = 0; k < m; ++k) {
        if (tg.epoch_index_hash[k] != t2.epoch_index_hash[k]) {
          throw InvariantViolation("coupled chains consumed different indices at epoch " +
                                   std::to_string(k));
        }
      }
    }
    const std::size_t len = std::min(tg.epoch_iterates.size(), t2.epoch_iterates.size());
    Vector sum_g = Vector::Zero(d), sum_2g = Vector::Zero(d);
    for (std::size_t k = 0; k < len; ++k) {
      result.extrap_last.push_back(extrapolate_last(tg.epoch_iterates[k], t2.epoch_iterates[k]));
      if (k > config.burn_in) {
        sum_g += tg.epoch_iterates[k];
        sum_2g += t2.epoch_iterates[k];
        result.extrap_avg.push_back(extrapolate_average(sum_g, sum_2g, k - config.burn_in));
      } else {
        result.extrap_avg.emplace_back();
      }
      if (result.x_star) {
        result.err_extrap_last.push_back((result.extrap_last.back() - *result.x_star).squaredNorm());
        result.err_extrap_avg.push_back(result.extrap_avg.back().size() == 0
                                            ? NAN
                                            : (result.extrap_avg.back() - *result.x_star).squaredNorm());
      }
      double ms = 0.0;
      if (config.execution == ChainExecution::Sequential) {
        ms = tg.epoch_wall_ms[k] + t2.epoch_wall_ms[k];
      } else {
        ms = std::max(tg.epoch_wall_ms[k], t2.epoch_wall_ms[k]);
      }
      result.epoch_wall_ms.push_back(ms);
    }
    ExtrapolatedEstimate est;
    est.last = result.extrap_last.back();
    est.averaged = result.extrap_avg.back().size() > 0 ? result.extrap_avg.back() : est.last;
    est.source_gamma = config.gamma;
    result.estimate = std::move(est);
  }
  result.wall_time = ms_since(t0) / 1000.0;
  return result;
}

double component_second_moment(const FiniteSumProblem& problem, const Vector& x) {
  Vector f(static_cast<Eigen::Index>(problem.d()));
  double s = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i) {
    problem.evaluate(i, x, f);
    s += f.squaredNorm();
  }
  return s / static_cast<double>(problem.n());
}

VariantStepper::VariantStepper(const FiniteSumProblem& problem, const RunConfig& config,
                               CoupledPlans plans, const Vector& x0, double sigma_star_sq)
    : problem_(&problem),
      extrap_(is_extrapolated(config.variant)),
      plans_(std::move(plans)),
      chain_(problem, config.base_method, config.gamma, x0),
      output_(x0) {
  if (!(config.gamma >= 0.0) || !std::isfinite(config.gamma)) {
    throw ParameterError("VariantStepper: gamma must be finite and nonnegative");
  }
  check_plan(plans_.plan_gamma, config.variant);
  if (extrap_) {
    check_plan(plans_.plan_two_gamma, config.variant);
    chain_2g_.emplace(problem, config.base_method, 2.0 * config.gamma, x0);
  }
  const double steps[2] = {config.gamma, 2.0 * config.gamma};
  for (int c = 0; c < 2; ++c) {
    const NoiseParams p = noise_for(config, problem.n(), problem.d(), steps[c], sigma_star_sq);
    sd_[c] = p.epoch_sd;
    inner_sd_[c] = p.inner_sd;
  }
}

const Vector& VariantStepper::state_two_gamma() const {
  if (!chain_2g_) throw ParameterError("VariantStepper: no 2*gamma chain for this variant");
  return chain_2g_->state();
}

void VariantStepper::advance() {
  const std::size_t n = problem_->n();
  const bool noisy = sd_[0] > 0.0 || inner_sd_[0] > 0.0;
  const std::uint64_t id = plans_.plan_gamma.epoch_counter();
  const auto idx = plans_.plan_gamma.next_epoch(n);
  CounterRng rng = plans_.plan_gamma.noise_rng(id);
  chain_.run_epoch(idx, noisy ? &rng : nullptr, sd_[0], inner_sd_[0]);
  if (is_diverged(chain_.state())) {
    throw DivergenceError("perturbed iterate diverged", chain_.state(), (epoch_ + 1) * n);
  }
  if (extrap_) {
    const std::uint64_t id2 = plans_.plan_two_gamma.epoch_counter();
    const auto idx2 = plans_.coupled() ? idx : plans_.plan_two_gamma.next_epoch(n);
    if (plans_.coupled()) plans_.plan_two_gamma.next_epoch(n);
    CounterRng rng2 = plans_.plan_two_gamma.noise_rng(id2);
    chain_2g_->run_epoch(idx2, noisy ? &rng2 : nullptr, sd_[1], inner_sd_[1]);
    if (is_diverged(chain_2g_->state())) {
      throw DivergenceError("perturbed iterate diverged", chain_2g_->state(), (epoch_ + 1) * n);
    }
    output_ = 2.0 * chain_.state() - chain_2g_->state();
  } else {
    output_ = chain_.state();
  }
  ++epoch_;
}

RunResult run_variant(const FiniteSumProblem& problem, const RunConfig& config,
                      const SamplingPlan& plan) {
  if (is_extrapolated(config.variant)) {
    throw ParameterError(std::string("variant ") + to_string(config.variant) +
                         " needs coupled plans for its two chains");
  }
  return run_variant(problem, config, CoupledPlans{plan, plan});
}

RunResult run_variant(const FiniteSumProblem& problem, const RunConfig& config) {
  return run_variant(problem, config, plans_for(config));
}

}  // namespace rrvi
