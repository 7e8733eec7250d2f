// Command-line front end: rrvi {gen,run,sweep,clt,lemma-check,timing}.

#include <cctype>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rrvi/errors.hpp"
#include "rrvi/harness.hpp"

namespace {

using namespace rrvi::harness;

// Reads JSON config files ({"seed": 1, "run": {"gamma": 1e-3}}) and falls
// back to CLI11's TOML/INI reader for anything else.
class JsonOrTomlConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::stringstream buf;
    buf << input.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream again(text);
      return CLI::ConfigTOML::from_config(again);
    }
    std::vector<CLI::ConfigItem> items;
    flatten(nlohmann::json::parse(text), {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        flatten(value, p, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& e : value) item.inputs.push_back(scalar(e));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void add_problem_options(CLI::App* app, ProblemOptions& p, bool with_path) {
  if (with_path) app->add_option("--problem", p.path, "Problem JSON written by gen");
  app->add_option("--kind", p.kind, "Generator when no file is given: game, affine or wgan")
      ->capture_default_str();
  app->add_option("--n", p.n, "Number of components")->capture_default_str();
  app->add_option("--d", p.d, "Dimension (per player for games)")->capture_default_str();
  app->add_option("--mu", p.mu, "Smallest eigenvalue of the diagonal blocks")
      ->capture_default_str();
  app->add_option("--L", p.L, "Largest eigenvalue of the diagonal blocks")
      ->capture_default_str();
  app->add_option("--coupling-max", p.coupling_max, "Upper end of the coupling spectrum")
      ->capture_default_str();
  app->add_option("--offset-scale", p.offset_scale, "Scale of the component offsets")
      ->capture_default_str();
  app->add_flag("--resample-basis", p.resample_basis, "Fresh eigenbasis per component");
  app->add_option("--shift", p.shift, "Affine generator: diagonal shift")->capture_default_str();
  app->add_option("--sym-spread", p.sym_spread, "Affine generator: symmetric spread")
      ->capture_default_str();
  app->add_option("--skew-spread", p.skew_spread, "Affine generator: skew spread")
      ->capture_default_str();
  app->add_option("--cov-scale", p.cov_scale, "WGAN data covariance scale")
      ->capture_default_str();
  app->add_option("--problem-seed", p.seed, "Generator seed (defaults to --seed)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random reshuffling and Richardson-Romberg extrapolation for finite-sum VIPs"};
  app.config_formatter(std::make_shared<JsonOrTomlConfig>());
  app.set_config("--config", "", "JSON or TOML config file; flags win");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker cap (0 = hardware threads)")
      ->capture_default_str();
  app.add_option("--out", global.out, "Output path (default stdout)");

  int status = 0;

  ProblemOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a problem and print its constants");
  add_problem_options(gen_cmd, gen, false);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run one variant and write its error trajectory");
  add_problem_options(run_cmd, run.problem, true);
  run_cmd->add_option("--gamma", run.gamma, "Step size")->capture_default_str();
  run_cmd->add_option("--epochs", run.epochs, "Number of epochs")->capture_default_str();
  run_cmd->add_option("--variant", run.variant, "plain, rrresh, rrrom or rrrom-rrresh")
      ->capture_default_str();
  run_cmd->add_option("--method", run.method, "sgda, seg or omd")->capture_default_str();
  run_cmd->add_flag("--perturb", run.perturb, "Add the calibrated epoch perturbation");
  run_cmd->add_option("--noise-scale", run.noise_scale, "Perturbation variance multiplier")
      ->capture_default_str();
  run_cmd->add_flag("--inner-noise", run.inner_noise, "Perturb after every inner step");
  run_cmd->add_option("--sampling", run.sampling, "reshuffle, withrep or fixed");
  run_cmd->add_flag("--independent-perms", run.independent_perms,
                    "Separate index streams for the two chains");
  run_cmd->add_option("--sigma-star", run.sigma_star_sq, "sigma*^2 for the perturbation");
  run_cmd->add_option("--burn-in", run.burn_in, "Epochs excluded from averaging")
      ->capture_default_str();
  run_cmd->add_flag("--record-time", run.record_time, "Fill the wall_ms column");
  run_cmd->add_option("--execution", run.execution, "sequential, threads or lockstep")
      ->capture_default_str();
  run_cmd->add_option("--x0", run.x0, "zero, random or star")->capture_default_str();
  run_cmd->add_option("--repeats", run.repeats, "Independent runs averaged into one curve")
      ->capture_default_str();
  run_cmd->add_option("--iterates-out", run.iterates_out, "Binary dump of epoch iterates");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Bias or moment curves over a step-size list");
  add_problem_options(sweep_cmd, sweep.problem, true);
  sweep_cmd->add_option("--suite", sweep.suite, "bias, mse, fourth or third")
      ->capture_default_str();
  sweep_cmd->add_option("--gammas", sweep.gammas, "Step sizes")->delimiter(',');
  sweep_cmd->add_option("--estimator", sweep.estimator, "exact-enum or monte-carlo")
      ->capture_default_str();
  sweep_cmd->add_option("--variant", sweep.variant, "Variant for Monte Carlo suites")
      ->capture_default_str();
  sweep_cmd->add_flag("--perturb", sweep.perturb, "Perturbed chains");
  sweep_cmd->add_option("--noise-scale", sweep.noise_scale, "Perturbation variance multiplier")
      ->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds, "Chains per estimate")->capture_default_str();
  sweep_cmd->add_option("--min-window", sweep.min_window, "Smallest averaging window")
      ->capture_default_str();
  sweep_cmd->add_flag("!--no-convergence-check", sweep.check_convergence,
                      "Skip the plateau stability check");
  sweep_cmd->add_option("--summary-out", sweep.summary_out, "Slope summary JSON path");

  CltCommandOptions clt;
  auto* clt_cmd = app.add_subcommand("clt", "Normalized sums and averages of an observable");
  add_problem_options(clt_cmd, clt.problem, true);
  clt_cmd->add_option("--T", clt.T, "Averaging horizons")->delimiter(',');
  clt_cmd->add_option("--gammas", clt.gammas, "Step sizes")->delimiter(',');
  clt_cmd->add_option("--gamma-fractions", clt.gamma_fractions,
                      "Step sizes as fractions of gamma_max when --gammas is absent")
      ->delimiter(',');
  clt_cmd->add_option("--trials", clt.trials, "Independent chains")->capture_default_str();
  clt_cmd->add_option("--observable", clt.observable,
                      "game-value, coordinate, sq-distance or distance")
      ->capture_default_str();
  clt_cmd->add_option("--variant", clt.variant, "Chain variant")->capture_default_str();
  clt_cmd->add_flag("!--no-perturb", clt.perturb, "Run without the perturbation");
  clt_cmd->add_option("--summary-out", clt.summary_out, "Summary statistics JSON path");

  LemmaCheckOptions lemma;
  auto* lemma_cmd = app.add_subcommand("lemma-check", "Randomized invariant suites");
  add_problem_options(lemma_cmd, lemma.problem, true);
  lemma_cmd->add_option("--suite", lemma.suite, "fourth-moment, jacobian, prop-bounds or drift")
      ->capture_default_str();
  lemma_cmd->add_option("--instances", lemma.instances, "Random instances")
      ->capture_default_str();
  lemma_cmd->add_option("--permutations", lemma.permutations, "Permutations per instance")
      ->capture_default_str();
  lemma_cmd->add_option("--gamma-factor", lemma.gamma_factor, "gamma as a multiple of gamma_max")
      ->capture_default_str();
  lemma_cmd->add_option("--points", lemma.points, "Evaluation points")->capture_default_str();
  lemma_cmd->add_option("--states", lemma.states, "Drift start states")->capture_default_str();
  lemma_cmd->add_option("--samples", lemma.samples, "Drift samples per state")
      ->capture_default_str();

  TimingOptions timing;
  auto* timing_cmd = app.add_subcommand("timing", "Wall-clock time of the four variants");
  add_problem_options(timing_cmd, timing.problem, true);
  timing_cmd->add_option("--gamma", timing.gamma, "Step size")->capture_default_str();
  timing_cmd->add_option("--epochs", timing.epochs, "Epoch budget")->capture_default_str();
  timing_cmd->add_option("--execution", timing.execution, "sequential, threads or lockstep")
      ->capture_default_str();
  timing_cmd->add_flag("!--no-perturb", timing.perturb, "Run without the perturbation");
  timing_cmd->add_option("--repeats", timing.repeats, "Timed runs per variant (fastest kept)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) {
      std::ostream& log = global.out.empty() ? std::cerr : std::cout;
      status = cmd_gen(gen, global, std::cout, log);
    } else if (*run_cmd) {
      status = cmd_run(run, global, std::cout, std::cerr);
    } else if (*sweep_cmd) {
      status = cmd_sweep(sweep, global, std::cout, std::cerr);
    } else if (*clt_cmd) {
      status = cmd_clt(clt, global, std::cout, std::cerr);
    } else if (*lemma_cmd) {
      status = cmd_lemma_check(lemma, global, std::cout, std::cerr);
    } else if (*timing_cmd) {
      status = cmd_timing(timing, global, std::cout, std::cerr);
    }
  } catch (const rrvi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
