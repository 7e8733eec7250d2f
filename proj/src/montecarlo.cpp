#include "rrvi/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "rrvi/errors.hpp"
#include "rrvi/parallel.hpp"
#include "rrvi/samplers.hpp"
#include "rrvi/stats.hpp"

namespace rrvi {

const char* to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::GameValue:
      return "game-value";
    case ObservableKind::Coordinate:
      return "coordinate";
    case ObservableKind::SquaredDistance:
      return "sq-distance";
    case ObservableKind::Distance:
      return "distance";
  }
  return "?";
}

ObservableKind observable_kind_from_string(const std::string& name) {
  for (auto k : {ObservableKind::GameValue, ObservableKind::Coordinate,
                 ObservableKind::SquaredDistance, ObservableKind::Distance}) {
    if (name == to_string(k)) return k;
  }
  throw ParameterError("unknown observable '" + name + "'");
}

Observable make_observable(ObservableKind kind, const FiniteSumProblem& problem,
                           const Vector& x_star, std::size_t index) {
  Observable o;
  o.kind = kind;
  o.index = index;
  switch (kind) {
    case ObservableKind::GameValue: {
      // Validates the problem shape up front.
      (void)game_value(problem, Vector::Zero(static_cast<Eigen::Index>(problem.d())));
      o.growth = GrowthClass::Quadratic;
      o.fn = [problem](const Vector& x) { return game_value(problem, x); };
      break;
    }
    case ObservableKind::Coordinate:
      if (index >= problem.d()) throw ParameterError("coordinate observable: index out of range");
      o.growth = GrowthClass::Linear;
      o.fn = [index](const Vector& x) { return x[static_cast<Eigen::Index>(index)]; };
      break;
    case ObservableKind::SquaredDistance:
      o.growth = GrowthClass::Quadratic;
      o.fn = [x_star](const Vector& x) { return (x - x_star).squaredNorm(); };
      break;
    case ObservableKind::Distance:
      o.growth = GrowthClass::Linear;
      o.fn = [x_star](const Vector& x) { return (x - x_star).norm(); };
      break;
  }
  return o;
}

namespace {

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return derive_key(master, streams::kTrial, trial);
}

Vector resolve_x_star(const FiniteSumProblem& problem, const RunConfig& config,
                      const std::optional<Vector>& override_x) {
  if (override_x) return *override_x;
  if (config.x_star) return *config.x_star;
  if (!problem.is_affine()) throw ParameterError("Monte Carlo estimator: x* is required");
  return exact_solution(problem);
}

double resolve_mu(const FiniteSumProblem& problem, const Vector& x_star,
                  const std::optional<double>& mu) {
  if (mu) return *mu;
  if (!problem.is_affine()) throw ParameterError("Monte Carlo estimator: mu is required");
  return problem_constants(problem, x_star).mu;
}

double resolve_sigma(const FiniteSumProblem& problem, const RunConfig& config,
                     const Vector& x_star) {
  if (!config.perturb) return 0.0;
  return config.sigma_star_sq ? *config.sigma_star_sq : component_second_moment(problem, x_star);
}

std::size_t burn_in_epochs(double factor, double gamma, std::size_t n, double mu) {
  if (!(gamma > 0.0)) throw ParameterError("Monte Carlo estimator: gamma must be positive");
  if (!(mu > 0.0)) throw ParameterError("Monte Carlo estimator: mu must be positive");
  return static_cast<std::size_t>(std::ceil(factor / (gamma * static_cast<double>(n) * mu)));
}

Vector start_point(const RunConfig& config, const Vector& fallback) {
  return config.x0.size() == 0 ? fallback : config.x0;
}

double powered_distance(const Vector& x, const Vector& x_star, int power) {
  const double sq = (x - x_star).squaredNorm();
  switch (power) {
    case 2:
      return sq;
    case 4:
      return sq * sq;
    default:
      return std::pow(sq, 0.5 * power);
  }
}

}  // namespace

std::vector<PlateauEstimate> moment_plateau(const FiniteSumProblem& problem,
                                            const RunConfig& config,
                                            std::span<const double> gammas, int power,
                                            const MonteCarloOptions& options) {
  if (gammas.empty()) throw ParameterError("plateau: empty gamma list");
  if (power < 1) throw ParameterError("plateau: power must be at least 1");
  if (options.seeds < 2) throw ParameterError("plateau: need at least two seeds");
  const Vector x_star = resolve_x_star(problem, config, options.x_star);
  const double mu = resolve_mu(problem, x_star, options.mu);
  const double sigma = resolve_sigma(problem, config, x_star);
  const Vector x0 = start_point(config, x_star);

  std::vector<PlateauEstimate> out;
  for (double gamma : gammas) {
    PlateauEstimate est;
    est.gamma = gamma;
    est.power = power;
    est.burn_in = burn_in_epochs(options.burn_in_factor, gamma, problem.n(), mu);
    est.window = std::max<std::size_t>(est.burn_in, options.min_window);
    est.window += est.window % 2;
    const std::size_t half = est.window / 2;

    std::vector<double> first(options.seeds), second(options.seeds);
    parallel_for(options.seeds, options.threads, [&](std::size_t s) {
      RunConfig cfg = config;
      cfg.gamma = gamma;
      cfg.seed = trial_seed(config.seed, s);
      VariantStepper stepper(problem, cfg, plans_for(cfg), x0, sigma);
      for (std::size_t k = 0; k < est.burn_in; ++k) stepper.advance();
      double a = 0.0, b = 0.0;
      for (std::size_t k = 0; k < est.window; ++k) {
        stepper.advance();
        const double v = powered_distance(stepper.output(), x_star, power);
        (k < half ? a : b) += v;
      }
      first[s] = a / static_cast<double>(half);
      second[s] = b / static_cast<double>(half);
    });

    std::vector<double> whole(options.seeds), diff(options.seeds);
    for (std::size_t s = 0; s < options.seeds; ++s) {
      whole[s] = 0.5 * (first[s] + second[s]);
      diff[s] = second[s] - first[s];
    }
    est.value = mean(whole);
    est.std_error = standard_error(whole);
    const double shift = mean(diff);
    est.trend = est.value > 0.0 ? shift / est.value : 0.0;
    if (options.check_convergence && est.value > 0.0 && std::abs(est.trend) > 0.05 &&
        std::abs(shift) > 3.0 * standard_error(diff)) {
      throw NotConvergedError("plateau at gamma=" + std::to_string(gamma) +
                              " still trending: halves differ by " +
                              std::to_string(100.0 * est.trend) + "%");
    }
    out.push_back(est);
  }
  return out;
}

std::vector<PlateauEstimate> mse_plateau(const FiniteSumProblem& problem, const RunConfig& config,
                                         std::span<const double> gammas,
                                         const MonteCarloOptions& options) {
  return moment_plateau(problem, config, gammas, 2, options);
}

std::vector<PlateauEstimate> fourth_plateau(const FiniteSumProblem& problem,
                                            const RunConfig& config,
                                            std::span<const double> gammas,
                                            const MonteCarloOptions& options) {
  return moment_plateau(problem, config, gammas, 4, options);
}

TailMeanEstimate tail_mean_estimate(const FiniteSumProblem& problem, const RunConfig& config,
                                    const MonteCarloOptions& options) {
  if (options.seeds < 2) throw ParameterError("tail mean: need at least two seeds");
  const Vector x_star = resolve_x_star(problem, config, options.x_star);
  const double mu = resolve_mu(problem, x_star, options.mu);
  const double sigma = resolve_sigma(problem, config, x_star);
  const Vector x0 = start_point(config, x_star);

  RunConfig base = config;
  base.variant = is_reshuffled(config.variant) ? Variant::RRromRRresh : Variant::RRrom;
  base.independent_perms = false;

  TailMeanEstimate est;
  est.gamma = config.gamma;
  est.burn_in = burn_in_epochs(options.burn_in_factor, config.gamma, problem.n(), mu);
  est.window = std::max<std::size_t>(est.burn_in, options.min_window);
  est.per_seed_gamma.resize(options.seeds);
  est.per_seed_extrap.resize(options.seeds);
  parallel_for(options.seeds, options.threads, [&](std::size_t s) {
    RunConfig cfg = base;
    cfg.seed = trial_seed(config.seed, s);
    VariantStepper stepper(problem, cfg, plans_for(cfg), x0, sigma);
    for (std::size_t k = 0; k < est.burn_in; ++k) stepper.advance();
    Vector sum_g = Vector::Zero(x0.size()), sum_e = Vector::Zero(x0.size());
    for (std::size_t k = 0; k < est.window; ++k) {
      stepper.advance();
      sum_g += stepper.state_gamma();
      sum_e += stepper.output();
    }
    est.per_seed_gamma[s] = sum_g / static_cast<double>(est.window);
    est.per_seed_extrap[s] = sum_e / static_cast<double>(est.window);
  });
  est.mean_gamma = Vector::Zero(x0.size());
  est.mean_extrap = Vector::Zero(x0.size());
  for (std::size_t s = 0; s < options.seeds; ++s) {
    est.mean_gamma += est.per_seed_gamma[s];
    est.mean_extrap += est.per_seed_extrap[s];
  }
  est.mean_gamma /= static_cast<double>(options.seeds);
  est.mean_extrap /= static_cast<double>(options.seeds);
  return est;
}

std::vector<CltSample> clt_series(const FiniteSumProblem& problem, const RunConfig& config,
                                  const Observable& observable, std::span<const std::size_t> Ts,
                                  std::size_t trials, const CltOptions& options) {
  if (Ts.empty()) throw ParameterError("clt_harness: empty list of horizons");
  for (std::size_t T : Ts) {
    if (T < 10) throw ParameterError("clt_harness: T must be at least 10");
  }
  if (trials == 0) throw ParameterError("clt_harness: need at least one trial");
  if (!observable.fn) throw ParameterError("clt_harness: empty observable");
  const Vector x_star = resolve_x_star(problem, config, std::nullopt);
  const double sigma = resolve_sigma(problem, config, x_star);
  const Vector x0 = start_point(config, x_star);
  const std::size_t T_max = *std::max_element(Ts.begin(), Ts.end());
  std::size_t burn =
      static_cast<std::size_t>(std::ceil(options.burn_in_fraction * static_cast<double>(T_max)));
  if (options.burn_in_factor > 0.0) {
    const double mu = resolve_mu(problem, x_star, options.mu);
    burn += burn_in_epochs(options.burn_in_factor, config.gamma, problem.n(), mu);
  }

  // prefix[j][t] = sum of l over the first t recorded epochs of trial j.
  std::vector<std::vector<double>> prefix(trials, std::vector<double>(T_max + 1, 0.0));
  parallel_for(trials, options.threads, [&](std::size_t j) {
    RunConfig cfg = config;
    cfg.seed = trial_seed(config.seed, j);
    VariantStepper stepper(problem, cfg, plans_for(cfg), x0, sigma);
    for (std::size_t k = 0; k < burn; ++k) stepper.advance();
    auto& pj = prefix[j];
    for (std::size_t t = 0; t < T_max; ++t) {
      pj[t + 1] = pj[t] + observable(stepper.output());
      if (t + 1 < T_max) stepper.advance();
    }
  });

  std::vector<CltSample> out;
  for (std::size_t T : Ts) {
    CltSample smp;
    smp.T = T;
    smp.trials = trials;
    smp.gamma = config.gamma;
    double total = 0.0;
    for (const auto& pj : prefix) total += pj[T];
    const double Td = static_cast<double>(T);
    smp.pooled_mean = total / (Td * static_cast<double>(trials));
    const double root = std::sqrt(Td);
    for (const auto& pj : prefix) {
      smp.normalized_sums.push_back((pj[T] - Td * smp.pooled_mean) / root);
      smp.averaged_values.push_back(pj[T] / Td);
    }
    out.push_back(std::move(smp));
  }
  return out;
}

CltSample clt_harness(const FiniteSumProblem& problem, const RunConfig& config,
                      const Observable& observable, std::size_t T, std::size_t trials,
                      const CltOptions& options) {
  const std::size_t Ts[] = {T};
  return std::move(clt_series(problem, config, observable, Ts, trials, options).front());
}

ErgodicDecay ergodic_decay(const FiniteSumProblem& problem, const RunConfig& config,
                           const Observable& observable, std::size_t K, std::size_t trials,
                           const ErgodicOptions& options) {
  if (trials < 100) throw ParameterError("ergodic_decay: need at least 100 trials");
  if (!observable.fn) throw ParameterError("ergodic_decay: empty observable");
  if (observable.growth != GrowthClass::Linear) {
    throw ParameterError(std::string("ergodic_decay: observable '") + to_string(observable.kind) +
                         "' grows quadratically; the decay estimate needs linear growth");
  }
  const Vector x_star = resolve_x_star(problem, config, std::nullopt);
  const double mu = resolve_mu(problem, x_star, options.mu);
  const double sigma = resolve_sigma(problem, config, x_star);
  const Vector x0 = config.x0.size() == 0
                        ? Vector::Zero(static_cast<Eigen::Index>(problem.d()))
                        : config.x0;
  const std::size_t burn = burn_in_epochs(options.burn_in_factor, config.gamma, problem.n(), mu);
  const std::size_t tail = std::max<std::size_t>(burn, 100);

  std::vector<std::vector<double>> marg(trials, std::vector<double>(K + 1));
  std::vector<double> tail_mean(trials);
  parallel_for(trials, options.threads, [&](std::size_t j) {
    RunConfig cfg = config;
    cfg.seed = trial_seed(config.seed, j);
    VariantStepper stepper(problem, cfg, plans_for(cfg), x0, sigma);
    for (std::size_t k = 0; k < options.warm_start; ++k) stepper.advance();
    marg[j][0] = observable(stepper.output());
    for (std::size_t k = 1; k <= K; ++k) {
      stepper.advance();
      marg[j][k] = observable(stepper.output());
    }
    for (std::size_t k = 0; k < burn; ++k) stepper.advance();
    double s = 0.0;
    for (std::size_t k = 0; k < tail; ++k) {
      stepper.advance();
      s += observable(stepper.output());
    }
    tail_mean[j] = s / static_cast<double>(tail);
  });

  ErgodicDecay out;
  out.stationary_mean = mean(tail_mean);
  out.stationary_se = standard_error(tail_mean);
  std::vector<double> col(trials);
  std::vector<double> fit_k, fit_log;
  bool leading = true;
  for (std::size_t k = 0; k <= K; ++k) {
    for (std::size_t j = 0; j < trials; ++j) col[j] = marg[j][k];
    const double se_k = standard_error(col);
    const double dev = std::abs(mean(col) - out.stationary_mean);
    const double se = std::sqrt(se_k * se_k + out.stationary_se * out.stationary_se);
    out.deviation.push_back(dev);
    out.deviation_se.push_back(se);
    if (leading && dev > options.fit_threshold * se && dev > 0.0) {
      fit_k.push_back(static_cast<double>(k));
      fit_log.push_back(std::log(dev));
    } else {
      leading = false;
    }
  }
  out.fit_points = fit_k.size();
  if (fit_k.size() >= 3) {
    const LineFit f = fit_line(fit_k, fit_log);
    out.rate = std::exp(f.slope);
    out.rate_se = out.rate * f.slope_se;
  } else {
    out.rate = NAN;
    out.rate_se = NAN;
  }
  return out;
}

bool DriftReport::holds() const {
  for (const auto& s : states)
    if (!s.holds) return false;
  return !states.empty();
}

DriftReport drift_check(const FiniteSumProblem& problem, const RunConfig& config,
                        const ProblemConstants& constants, std::span<const Vector> states,
                        std::size_t samples, unsigned threads) {
  if (samples < 2) throw ParameterError("drift_check: need at least two samples per state");
  const double n = static_cast<double>(problem.n());
  const double g = config.gamma;
  const double mu = constants.mu;
  if (!(mu > 0.0)) throw ParameterError("drift_check: mu must be positive");
  DriftReport rep;
  rep.c1 = 1.0 - g * n * mu / 2.0;
  rep.c2 = g * n * mu / 2.0 +
           8.0 * n * g * g * constants.L_max * constants.L_max * constants.sigma_star_sq /
               (mu * mu) +
           8.0 * constants.lambda / mu;
  const Vector& x_star = constants.x_star;
  const double sigma = config.perturb ? (config.sigma_star_sq ? *config.sigma_star_sq
                                                              : constants.sigma_star_sq)
                                      : 0.0;

  std::vector<double> energy(states.size() * samples);
  parallel_for(energy.size(), threads, [&](std::size_t idx) {
    const std::size_t j = idx / samples;
    RunConfig cfg = config;
    cfg.seed = trial_seed(config.seed, idx);
    VariantStepper stepper(problem, cfg, plans_for(cfg), states[j], sigma);
    stepper.advance();
    energy[idx] = (stepper.output() - x_star).squaredNorm() + 1.0;
  });
  for (std::size_t j = 0; j < states.size(); ++j) {
    std::span<const double> e(energy.data() + j * samples, samples);
    DriftState st;
    st.energy = (states[j] - x_star).squaredNorm() + 1.0;
    st.mean_next = mean(e);
    st.se_next = standard_error(e);
    st.bound = rep.c1 * st.energy + rep.c2;
    st.holds = st.mean_next <= st.bound + 3.0 * st.se_next;
    rep.states.push_back(st);
  }
  return rep;
}

}  // namespace rrvi
