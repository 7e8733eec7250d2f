#include "rrvi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "rrvi/analysis_io.hpp"
#include "rrvi/errors.hpp"
#include "rrvi/jacobian.hpp"
#include "rrvi/moments.hpp"
#include "rrvi/montecarlo.hpp"
#include "rrvi/problem_io.hpp"
#include "rrvi/samplers.hpp"
#include "rrvi/stationary.hpp"
#include "rrvi/stats.hpp"
#include "rrvi/trajectory_io.hpp"

namespace rrvi::harness {

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

// Output goes to a file when a path is given, to `fallback` otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ParameterError("cannot open '" + path + "' for writing");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void write_json(const nlohmann::json& doc, const std::string& path, std::ostream& fallback) {
  Sink sink(path, fallback);
  sink.stream() << doc.dump(2) << '\n';
}

std::vector<double> sorted_gammas(std::vector<double> gammas, const char* who) {
  if (gammas.empty()) throw ParameterError(std::string(who) + ": empty gamma list");
  for (double g : gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ParameterError(std::string(who) + ": step sizes must be positive and finite");
    }
  }
  std::sort(gammas.begin(), gammas.end());
  if (std::adjacent_find(gammas.begin(), gammas.end()) != gammas.end()) {
    throw ParameterError(std::string(who) + ": duplicate step sizes");
  }
  return gammas;
}

struct Solved {
  Vector x_star;
  ProblemConstants constants;
};

Solved solve(const FiniteSumProblem& problem) {
  if (!problem.is_affine()) throw UnsupportedError("the harness needs an affine problem");
  Solved s;
  s.x_star = exact_solution(problem);
  s.constants = problem_constants(problem, s.x_star);
  return s;
}

double admissible_gamma_max(const FiniteSumProblem& problem, const ProblemConstants& c) {
  if (!(c.mu > 0.0)) {
    throw ParameterError("problem is not strongly monotone (mu = " + format_double(c.mu) +
                         "); gamma_max is undefined");
  }
  return gamma_max(problem.n(), c.mu, c.L_max);
}

nlohmann::json constants_json(const FiniteSumProblem& problem, const Solved& s) {
  const auto& c = s.constants;
  nlohmann::json j = {{"x_star", vector_to_json(s.x_star)},
                      {"mu", c.mu},
                      {"L_max", c.L_max},
                      {"lambda", c.lambda},
                      {"sigma_star_sq", c.sigma_star_sq},
                      {"gamma_max", nullptr}};
  if (c.mu > 0.0 && c.L_max > 0.0) j["gamma_max"] = gamma_max(problem.n(), c.mu, c.L_max);
  return j;
}

nlohmann::json provenance(const char* command, const GlobalOptions& global,
                          nlohmann::json options) {
  return {{"command", command}, {"global", to_json(global)}, {"options", std::move(options)}};
}

std::vector<double> element_mean(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  std::vector<double> m(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < m.size() && k < r.size(); ++k) m[k] += r[k];
  }
  for (auto& v : m) v /= static_cast<double>(rows.size());
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Problems and run configs

FiniteSumProblem build_problem(const ProblemOptions& opt, std::uint64_t global_seed) {
  if (!opt.path.empty()) return load_problem(opt.path);
  const std::uint64_t seed = opt.seed.value_or(global_seed);
  if (opt.n == 0 || opt.d == 0) throw ParameterError("problem: n and d must be positive");
  if (opt.kind == "game") {
    QuadraticGameSpec spec;
    spec.n = opt.n;
    spec.d = opt.d;
    spec.mu = opt.mu;
    spec.L = opt.L;
    spec.coupling_max = opt.coupling_max;
    spec.offset_scale = opt.offset_scale;
    spec.resample_basis = opt.resample_basis;
    spec.seed = seed;
    return generate_quadratic_game(spec);
  }
  if (opt.kind == "affine") {
    AffineProblemSpec spec;
    spec.n = opt.n;
    spec.d = opt.d;
    spec.shift = opt.shift;
    spec.sym_spread = opt.sym_spread;
    spec.skew_spread = opt.skew_spread;
    spec.offset_scale = opt.offset_scale;
    spec.seed = seed;
    return generate_affine_problem(spec);
  }
  if (opt.kind == "wgan") {
    const Vector target = Vector::Constant(static_cast<Eigen::Index>(opt.d), opt.offset_scale);
    return make_wgan_problem(target, opt.cov_scale, opt.n, seed);
  }
  throw ParameterError("unknown problem kind '" + opt.kind + "' (expected game, affine or wgan)");
}

RunConfig make_run_config(const RunOptions& opt, const FiniteSumProblem& problem,
                          std::uint64_t seed) {
  RunConfig cfg;
  cfg.gamma = opt.gamma;
  cfg.epochs = opt.epochs;
  cfg.perturb = opt.perturb;
  cfg.noise_scale = opt.noise_scale;
  cfg.inner_noise = opt.inner_noise;
  cfg.base_method = base_method_from_string(opt.method);
  cfg.variant = variant_from_string(opt.variant);
  cfg.seed = seed;
  cfg.burn_in = opt.burn_in;
  cfg.independent_perms = opt.independent_perms;
  cfg.execution = chain_execution_from_string(opt.execution);
  cfg.sigma_star_sq = opt.sigma_star_sq;

  if (!opt.sampling.empty()) {
    const SamplingMode mode = sampling_mode_from_string(opt.sampling);
    const bool reshuffled = is_reshuffled(cfg.variant);
    if ((mode == SamplingMode::WithReplacement) == reshuffled) {
      throw ParameterError(std::string("sampling '") + opt.sampling +
                           "' does not match variant " + to_string(cfg.variant));
    }
    cfg.fixed_order = mode == SamplingMode::FixedOrder;
  }

  const auto d = static_cast<Eigen::Index>(problem.d());
  if (opt.x0 == "random") {
    CounterRng rng(seed, streams::kInit, 0);
    cfg.x0 = normal_vector(rng, d);
  } else if (opt.x0 == "star") {
    cfg.x0 = exact_solution(problem);
  } else if (opt.x0 == "zero") {
    cfg.x0 = Vector::Zero(d);
  } else {
    throw ParameterError("unknown x0 mode '" + opt.x0 + "' (expected zero, random or star)");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared experiments

const std::vector<double>& AveragedCurve::output_error() const {
  return err_sq_extrap_last.empty() ? err_sq : err_sq_extrap_last;
}

double AveragedCurve::final_relative_error() const {
  const auto& out = output_error();
  if (out.empty() || err_sq.empty() || err_sq.front() == 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::log10(out.back() / err_sq.front());
}

AveragedCurve averaged_curve(const FiniteSumProblem& problem, const RunOptions& opt,
                             std::uint64_t seed, std::size_t seeds) {
  if (seeds == 0) throw ParameterError("averaged_curve: need at least one seed");
  AveragedCurve curve;
  curve.variant = variant_from_string(opt.variant);
  const Vector x_star = exact_solution(problem);
  std::vector<std::vector<double>> primary, last, avg;
  for (std::size_t s = 0; s < seeds; ++s) {
    RunConfig cfg = make_run_config(opt, problem, derive_key(seed, streams::kTrial, s));
    cfg.x_star = x_star;
    const RunResult r = run_variant(problem, cfg);
    if (r.diverged()) {
      curve.diverged = true;
      break;
    }
    primary.push_back(r.primary.per_epoch_error);
    if (r.companion) {
      last.push_back(r.err_extrap_last);
      avg.push_back(r.err_extrap_avg);
    }
  }
  curve.seeds = primary.size();
  curve.err_sq = element_mean(primary);
  curve.err_sq_extrap_last = element_mean(last);
  curve.err_sq_extrap_avg = element_mean(avg);
  return curve;
}

void write_averaged_csv(const AveragedCurve& curve, std::ostream& out) {
  out << "epoch,err_sq,err_sq_extrap_last,err_sq_extrap_avg,wall_ms,rel_err_log10,"
         "rel_err_extrap_log10,status\n";
  const bool extrap = !curve.err_sq_extrap_last.empty();
  const double base = curve.err_sq.empty() ? NAN : curve.err_sq.front();
  auto rel = [&](double e) { return base == 0.0 ? NAN : std::log10(e / base); };
  for (std::size_t k = 0; k < curve.err_sq.size(); ++k) {
    out << k << ',' << format_double(curve.err_sq[k]) << ',';
    if (extrap) out << format_double(curve.err_sq_extrap_last[k]);
    out << ',';
    if (extrap && k < curve.err_sq_extrap_avg.size()) out << format_double(curve.err_sq_extrap_avg[k]);
    out << ',' << format_double(0.0) << ',' << format_double(rel(curve.err_sq[k])) << ',';
    if (extrap) out << format_double(rel(curve.err_sq_extrap_last[k]));
    out << ",ok\n";
  }
  if (curve.diverged) out << curve.err_sq.size() << ",,,,,,,diverged\n";
}

std::vector<WallClockReport> time_variants(const FiniteSumProblem& problem,
                                           const TimingOptions& opt) {
  if (opt.repeats == 0) throw ParameterError("timing: repeats must be at least 1");
  const Vector x_star = exact_solution(problem);
  const double sigma_sq = component_second_moment(problem, x_star);
  const Variant variants[] = {Variant::Plain, Variant::RRresh, Variant::RRrom,
                              Variant::RRromRRresh};
  std::vector<WallClockReport> table;
  for (Variant v : variants) {
    table.push_back({to_string(v), std::numeric_limits<double>::infinity()});
  }
  // Repeats cycle through the variants so that load changes on the host hit
  // all of them alike.
  for (std::size_t r = 0; r < opt.repeats; ++r) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      RunConfig cfg;
      cfg.gamma = opt.gamma;
      cfg.epochs = opt.epochs;
      cfg.perturb = opt.perturb;
      cfg.variant = variants[i];
      cfg.execution = chain_execution_from_string(opt.execution);
      cfg.x_star = x_star;
      cfg.sigma_star_sq = sigma_sq;
      const auto t0 = std::chrono::steady_clock::now();
      const RunResult res = run_variant(problem, cfg);
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      if (res.diverged()) throw DivergenceError("timing run diverged", Vector(), 0);
      table[i].seconds = std::min(table[i].seconds, dt.count());
    }
  }
  return table;
}

bool close_relative(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

FourthMomentSuiteReport fourth_moment_suite(std::size_t instances, std::uint64_t seed) {
  FourthMomentSuiteReport rep;
  rep.instances = instances;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    CounterRng rng(seed, streams::kTrial, inst);
    const std::size_t n = 2 + rng.bounded(7);
    const auto d = static_cast<Eigen::Index>(1 + rng.bounded(5));
    const double scale = std::pow(10.0, 2.0 * rng.uniform01() - 1.0);
    std::vector<Vector> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(scale * normal_vector(rng, d));
    for (std::size_t k = 1; k <= n; ++k) {
      const MomentReport r = fourth_moment_report(xs, k, true);
      // Rounding floor relative to the k = 1 magnitude (1/n) S4.
      const double floor = 1e-13 * r.S4 / static_cast<double>(n);
      const bool identity_ok = close_relative(r.exact, r.brute, 1e-10, floor);
      const bool bound_ok = r.bound >= r.exact - floor;
      ++rep.cases;
      if (!identity_ok) ++rep.identity_failures;
      if (!bound_ok) ++rep.bound_failures;
      const double denom = std::max(std::abs(r.brute), floor);
      if (denom > 0.0) {
        rep.worst_relative_gap = std::max(rep.worst_relative_gap, std::abs(r.exact - r.brute) / denom);
      }
      if (!identity_ok || !bound_ok) {
        nlohmann::json j = to_json(r);
        j["instance"] = inst;
        rep.details.push_back(j);
      }
    }
  }
  return rep;
}

JacobianSuiteReport jacobian_suite(std::size_t problems, std::size_t permutations,
                                   double gamma_factor, std::uint64_t seed) {
  if (!(gamma_factor > 0.0)) throw ParameterError("jacobian suite: gamma factor must be positive");
  JacobianSuiteReport rep;
  rep.problems = problems;
  rep.permutations = permutations;
  for (std::size_t p = 0; p < problems; ++p) {
    CounterRng rng(seed, streams::kTrial, p);
    AffineProblemSpec spec;
    spec.n = 1 + rng.bounded(6);
    spec.d = 1 + rng.bounded(6);
    // Redraw until the mean operator is strongly monotone.
    std::optional<FiniteSumProblem> problem;
    Solved s;
    for (std::uint64_t attempt = 0; attempt < 1000 && !problem; ++attempt) {
      spec.seed = derive_key(seed, streams::kProblem, p * 1000 + attempt);
      FiniteSumProblem candidate = generate_affine_problem(spec);
      s = solve(candidate);
      if (s.constants.mu > 0.0) problem = candidate;
    }
    if (!problem) throw DegenerateProblemError("jacobian suite: no strongly monotone draw");
    const double g = gamma_factor * gamma_max(spec.n, s.constants.mu, s.constants.L_max);
    JacobianCheckOptions jo;
    jo.seed = derive_key(seed, streams::kSampling, p);
    jo.x_star = s.x_star;
    jo.L_max = s.constants.L_max;
    const JacobianCheckReport r = jacobian_bound_check(*problem, g, permutations, jo);
    rep.violations += r.violations;
    rep.worst_ratio = std::max(rep.worst_ratio, r.max_norm / r.bound);
    rep.details.push_back({{"problem", p},
                           {"n", spec.n},
                           {"d", spec.d},
                           {"gamma", g},
                           {"L_max", r.L_max},
                           {"bound", r.bound},
                           {"max_norm", r.max_norm},
                           {"violations", r.violations}});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen(const ProblemOptions& opt, const GlobalOptions& global, std::ostream& out,
            std::ostream& log) {
  const FiniteSumProblem problem = build_problem(opt, global.seed);
  const Solved s = solve(problem);
  nlohmann::json echo = constants_json(problem, s);
  // The generator's nominal constants; the echo above is measured.
  if (opt.path.empty() && opt.kind == "game" && opt.mu > 0.0 && opt.L > 0.0) {
    echo["gamma_max_nominal"] = gamma_max(problem.n(), opt.mu, opt.L);
  }
  nlohmann::json extra = {{"config", provenance("gen", global, to_json(opt))},
                          {"constants", echo}};
  {
    Sink sink(global.out, out);
    write_problem(problem, sink.stream(), extra);
  }
  log << echo.dump(2) << '\n';
  return 0;
}

int cmd_run(const RunOptions& opt, const GlobalOptions& global, std::ostream& out,
            std::ostream& log) {
  const FiniteSumProblem problem = build_problem(opt.problem, global.seed);
  if (opt.repeats == 0) throw ParameterError("run: repeats must be at least 1");
  Sink sink(global.out, out);
  if (opt.repeats == 1) {
    RunConfig cfg = make_run_config(opt, problem, global.seed);
    const RunResult r = run_variant(problem, cfg);
    write_trajectory_csv(r, sink.stream(), CsvOptions{opt.record_time});
    if (!opt.iterates_out.empty()) {
      std::ofstream bin(opt.iterates_out, std::ios::binary);
      if (!bin) throw ParameterError("cannot open '" + opt.iterates_out + "' for writing");
      write_iterates_binary(r.primary.epoch_iterates, bin);
    }
    if (r.diverged()) {
      log << "run diverged: " << r.primary.message << '\n';
      return 3;
    }
    return 0;
  }
  if (!opt.iterates_out.empty()) {
    throw ParameterError("run: --iterates-out needs a single repeat");
  }
  const AveragedCurve curve = averaged_curve(problem, opt, global.seed, opt.repeats);
  write_averaged_csv(curve, sink.stream());
  if (curve.diverged) {
    log << "run diverged after " << curve.seeds << " completed repeats\n";
    return 3;
  }
  return 0;
}

int cmd_sweep(const SweepOptions& opt, const GlobalOptions& global, std::ostream& out,
              std::ostream& log) {
  const std::vector<double> gammas = sorted_gammas(opt.gammas, "sweep");
  const FiniteSumProblem problem = build_problem(opt.problem, global.seed);
  const Solved s = solve(problem);

  RunConfig run;
  run.variant = variant_from_string(opt.variant);
  run.perturb = opt.perturb;
  run.noise_scale = opt.noise_scale;
  run.seed = global.seed;
  run.x_star = s.x_star;

  MonteCarloOptions mc;
  mc.seeds = opt.seeds;
  mc.threads = global.threads;
  mc.min_window = opt.min_window;
  mc.check_convergence = opt.check_convergence;
  mc.x_star = s.x_star;

  nlohmann::json summary = {{"config", provenance("sweep", global, to_json(opt))},
                            {"suite", opt.suite}};
  Sink sink(global.out, out);
  if (opt.suite == "bias") {
    BiasCurveOptions bo;
    bo.x_star = s.x_star;
    bo.run = run;
    bo.monte_carlo = mc;
    const BiasCurve c =
        bias_curve(problem, gammas, bias_estimator_from_string(opt.estimator), bo);
    write_bias_csv(c, sink.stream());
    summary["curve"] = to_json(c);
    summary["slope_gap"] = nullptr;
    if (c.slope_plain && c.slope_extrap) summary["slope_gap"] = *c.slope_extrap - *c.slope_plain;
  } else if (opt.suite == "mse" || opt.suite == "fourth" || opt.suite == "third") {
    admissible_gamma_max(problem, s.constants);
    for (double g : gammas) {
      if (auto branch = violated_gamma_branch(problem.n(), s.constants.mu, s.constants.L_max, g,
                                              false)) {
        throw ParameterError("sweep: gamma = " + format_double(g) +
                             " violates the step-size branch " + *branch);
      }
    }
    const int power = opt.suite == "mse" ? 2 : opt.suite == "fourth" ? 4 : 3;
    const auto plateaus = moment_plateau(problem, run, gammas, power, mc);
    write_plateau_csv(plateaus, sink.stream());
    std::vector<std::pair<double, double>> pts;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : plateaus) {
      rows.push_back(to_json(p));
      if (p.value > 0.0) pts.emplace_back(p.gamma, p.value);
    }
    summary["plateaus"] = rows;
    summary["slope"] = nullptr;
    summary["slope_se"] = nullptr;
    if (pts.size() >= 2) {
      const LineFit fit = fit_loglog(pts);
      summary["slope"] = fit.slope;
      summary["slope_se"] = fit.slope_se;
    }
    nlohmann::json ratios = nlohmann::json::array();
    for (std::size_t i = 1; i < plateaus.size(); ++i) {
      ratios.push_back(number(plateaus[i].value / plateaus[i - 1].value));
    }
    summary["ratios"] = ratios;
  } else {
    throw ParameterError("unknown sweep suite '" + opt.suite +
                         "' (expected bias, mse, fourth or third)");
  }
  write_json(summary, opt.summary_out, log);
  return 0;
}

int cmd_clt(const CltCommandOptions& opt, const GlobalOptions& global, std::ostream& out,
            std::ostream& log) {
  if (opt.T.empty()) throw ParameterError("clt: empty T list");
  if (opt.trials == 0) throw ParameterError("clt: trials must be at least 1");
  const FiniteSumProblem problem = build_problem(opt.problem, global.seed);
  const Solved s = solve(problem);
  std::vector<double> gammas = opt.gammas;
  if (gammas.empty()) {
    if (opt.gamma_fractions.empty()) throw ParameterError("clt: empty gamma list");
    const double gmax = admissible_gamma_max(problem, s.constants);
    for (double f : opt.gamma_fractions) gammas.push_back(f * gmax);
  }
  for (double g : gammas) {
    if (!(g > 0.0)) throw ParameterError("clt: step sizes must be positive");
  }
  const Observable obs =
      make_observable(observable_kind_from_string(opt.observable), problem, s.x_star);

  RunConfig cfg;
  cfg.variant = variant_from_string(opt.variant);
  cfg.perturb = opt.perturb;
  cfg.seed = global.seed;
  cfg.x_star = s.x_star;
  cfg.sigma_star_sq = s.constants.sigma_star_sq;
  CltOptions co;
  co.threads = global.threads;
  // Without strong monotonicity there is no contraction rate to size the burn-in.
  if (s.constants.mu > 0.0) {
    co.mu = s.constants.mu;
  } else {
    co.burn_in_factor = 0.0;
  }

  nlohmann::json series = nlohmann::json::array();
  Sink sink(global.out, out);
  std::ostream& csv = sink.stream();
  csv << "T,gamma,trial,normalized_sum,averaged_value\n";
  for (double g : gammas) {
    cfg.gamma = g;
    for (const CltSample& smp : clt_series(problem, cfg, obs, opt.T, opt.trials, co)) {
      for (std::size_t t = 0; t < smp.trials; ++t) {
        csv << smp.T << ',' << format_double(g) << ',' << t << ','
            << format_double(smp.normalized_sums[t]) << ','
            << format_double(smp.averaged_values[t]) << '\n';
      }
      nlohmann::json j = {{"T", smp.T},
                          {"gamma", g},
                          {"trials", smp.trials},
                          {"pooled_mean", number(smp.pooled_mean)}};
      if (smp.trials >= 2) {
        j["averaged_iqr"] = interquartile_range(smp.averaged_values);
        j["averaged_sd"] = std::sqrt(variance(smp.averaged_values));
        j["normalized_sd"] = std::sqrt(variance(smp.normalized_sums));
        j["normalized_skewness"] = number(skewness(smp.normalized_sums));
        j["normalized_excess_kurtosis"] = number(excess_kurtosis(smp.normalized_sums));
      }
      series.push_back(j);
    }
  }
  nlohmann::json summary = {{"config", provenance("clt", global, to_json(opt))},
                            {"series", series}};
  write_json(summary, opt.summary_out, log);
  return 0;
}

int cmd_lemma_check(const LemmaCheckOptions& opt, const GlobalOptions& global,
                    std::ostream& out, std::ostream& log) {
  nlohmann::json report = {{"config", provenance("lemma-check", global, to_json(opt))},
                           {"suite", opt.suite}};
  bool violated = false;
  bool informational = false;
  if (opt.suite == "fourth-moment") {
    const auto r = fourth_moment_suite(opt.instances, global.seed);
    report["instances"] = r.instances;
    report["cases"] = r.cases;
    report["identity_failures"] = r.identity_failures;
    report["bound_failures"] = r.bound_failures;
    report["worst_relative_gap"] = r.worst_relative_gap;
    report["failures"] = r.details;
    violated = r.identity_failures + r.bound_failures > 0;
  } else if (opt.suite == "jacobian") {
    const auto r = jacobian_suite(opt.instances, opt.permutations, opt.gamma_factor, global.seed);
    informational = opt.gamma_factor > 1.0;
    report["problems"] = r.problems;
    report["permutations"] = r.permutations;
    report["gamma_factor"] = opt.gamma_factor;
    report["violations"] = r.violations;
    report["worst_ratio"] = r.worst_ratio;
    nlohmann::json exceeding = nlohmann::json::array();
    for (const auto& p : r.details) {
      if (p["violations"].get<std::size_t>() > 0) exceeding.push_back(p["problem"]);
    }
    report["exceeding"] = exceeding;
    report["instances_detail"] = r.details;
    violated = r.violations > 0;
  } else if (opt.suite == "prop-bounds" || opt.suite == "drift") {
    const FiniteSumProblem problem = build_problem(opt.problem, global.seed);
    const Solved s = solve(problem);
    report["constants"] = constants_json(problem, s);
    report["constants"].erase("x_star");
    if (opt.suite == "prop-bounds") {
      const auto r = component_bound_check(problem, s.constants, opt.points, global.seed);
      report["points"] = r.points;
      report["violations_second"] = r.violations_second;
      report["violations_fourth"] = r.violations_fourth;
      report["violations_monotone"] = r.violations_monotone;
      report["worst_ratio_second"] = r.worst_ratio_second;
      report["worst_ratio_fourth"] = r.worst_ratio_fourth;
      report["min_monotone_ratio"] = r.min_monotone_ratio;
      violated = !r.holds();
    } else {
      RunConfig cfg;
      cfg.gamma = opt.gamma_factor * admissible_gamma_max(problem, s.constants);
      cfg.epochs = 1;
      cfg.perturb = true;
      cfg.variant = Variant::RRresh;
      cfg.seed = global.seed;
      cfg.x_star = s.x_star;
      cfg.sigma_star_sq = s.constants.sigma_star_sq;
      std::vector<Vector> states;
      for (std::size_t i = 0; i < opt.states; ++i) {
        CounterRng rng(global.seed, streams::kInit, i);
        states.push_back(s.x_star + normal_vector(rng, s.x_star.size()));
      }
      const DriftReport r = drift_check(problem, cfg, s.constants, states, opt.samples,
                                        global.threads);
      report["gamma"] = cfg.gamma;
      report["c1"] = r.c1;
      report["c2"] = r.c2;
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& st : r.states) {
        rows.push_back({{"energy", st.energy},
                        {"mean_next", st.mean_next},
                        {"se_next", st.se_next},
                        {"bound", st.bound},
                        {"holds", st.holds}});
      }
      report["states"] = rows;
      violated = !r.holds();
    }
  } else {
    throw ParameterError("unknown lemma-check suite '" + opt.suite +
                         "' (expected fourth-moment, jacobian, prop-bounds or drift)");
  }
  report["informational"] = informational;
  report["pass"] = !violated;
  write_json(report, global.out, out);
  if (violated) {
    log << opt.suite << ": violations found" << (informational ? " (informational)" : "") << '\n';
  }
  return violated && !informational ? 4 : 0;
}

int cmd_timing(const TimingOptions& opt, const GlobalOptions& global, std::ostream& out,
               std::ostream& log) {
  const FiniteSumProblem problem = build_problem(opt.problem, global.seed);
  const auto table = time_variants(problem, opt);
  Sink sink(global.out, out);
  sink.stream() << "method,seconds\n";
  for (const auto& row : table) sink.stream() << row.method << ',' << format_double(row.seconds) << '\n';
  log << "execution=" << opt.execution << " epochs=" << opt.epochs << " repeats=" << opt.repeats
      << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// Resolved configs

nlohmann::json to_json(const ProblemOptions& o) {
  nlohmann::json j = {{"path", o.path},
                      {"kind", o.kind},
                      {"n", o.n},
                      {"d", o.d},
                      {"mu", o.mu},
                      {"L", o.L},
                      {"coupling_max", o.coupling_max},
                      {"offset_scale", o.offset_scale},
                      {"resample_basis", o.resample_basis},
                      {"shift", o.shift},
                      {"sym_spread", o.sym_spread},
                      {"skew_spread", o.skew_spread},
                      {"cov_scale", o.cov_scale},
                      {"seed", nullptr}};
  if (o.seed) j["seed"] = *o.seed;
  return j;
}

nlohmann::json to_json(const GlobalOptions& o) {
  return {{"seed", o.seed}, {"threads", o.threads}, {"out", o.out}};
}

nlohmann::json to_json(const RunOptions& o) {
  nlohmann::json j = {{"problem", to_json(o.problem)},
                      {"gamma", o.gamma},
                      {"epochs", o.epochs},
                      {"variant", o.variant},
                      {"method", o.method},
                      {"perturb", o.perturb},
                      {"noise_scale", o.noise_scale},
                      {"inner_noise", o.inner_noise},
                      {"sampling", o.sampling},
                      {"independent_perms", o.independent_perms},
                      {"sigma_star_sq", nullptr},
                      {"burn_in", o.burn_in},
                      {"record_time", o.record_time},
                      {"execution", o.execution},
                      {"x0", o.x0},
                      {"repeats", o.repeats},
                      {"iterates_out", o.iterates_out}};
  if (o.sigma_star_sq) j["sigma_star_sq"] = *o.sigma_star_sq;
  return j;
}

nlohmann::json to_json(const SweepOptions& o) {
  return {{"problem", to_json(o.problem)},
          {"suite", o.suite},
          {"gammas", o.gammas},
          {"estimator", o.estimator},
          {"variant", o.variant},
          {"perturb", o.perturb},
          {"noise_scale", o.noise_scale},
          {"seeds", o.seeds},
          {"min_window", o.min_window},
          {"check_convergence", o.check_convergence},
          {"summary_out", o.summary_out}};
}

nlohmann::json to_json(const CltCommandOptions& o) {
  return {{"problem", to_json(o.problem)},
          {"T", o.T},
          {"gammas", o.gammas},
          {"gamma_fractions", o.gamma_fractions},
          {"trials", o.trials},
          {"observable", o.observable},
          {"variant", o.variant},
          {"perturb", o.perturb},
          {"summary_out", o.summary_out}};
}

nlohmann::json to_json(const LemmaCheckOptions& o) {
  return {{"problem", to_json(o.problem)},   {"suite", o.suite},
          {"instances", o.instances},        {"permutations", o.permutations},
          {"gamma_factor", o.gamma_factor},  {"points", o.points},
          {"states", o.states},              {"samples", o.samples}};
}

nlohmann::json to_json(const TimingOptions& o) {
  return {{"problem", to_json(o.problem)}, {"gamma", o.gamma},       {"epochs", o.epochs},
          {"execution", o.execution},      {"perturb", o.perturb},   {"repeats", o.repeats}};
}

}  // namespace rrvi::harness
