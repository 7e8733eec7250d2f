#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rrvi/errors.hpp"
#include "rrvi/harness.hpp"

using namespace rrvi;
using namespace rrvi::harness;

namespace {

ProblemOptions small_game(std::size_t n = 10, std::size_t d = 4) {
  ProblemOptions p;
  p.n = n;
  p.d = d;
  p.seed = 7;
  return p;
}

ProblemOptions small_affine() {
  ProblemOptions p;
  p.kind = "affine";
  p.n = 4;
  p.d = 3;
  p.seed = 1;
  return p;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string column(const std::string& row, std::size_t idx) {
  std::istringstream in(row);
  std::string cell;
  for (std::size_t i = 0; i <= idx; ++i) std::getline(in, cell, ',');
  return cell;
}

// Runs the command-line binary and returns its exit status.
int run_cli(const std::string& args, std::string* stdout_text = nullptr) {
  const auto tmp = std::filesystem::temp_directory_path() / "rrvi_cli_test_stdout.txt";
  const std::string cmd =
      std::string(RRVI_CLI_PATH) + " " + args + " > " + tmp.string() + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  if (stdout_text) {
    std::ifstream in(tmp);
    std::stringstream buf;
    buf << in.rdbuf();
    *stdout_text = buf.str();
  }
  std::filesystem::remove(tmp);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST(Gen, EchoesConstants) {
  ProblemOptions p;
  p.n = 1;
  p.d = 1;
  std::ostringstream out, log;
  EXPECT_EQ(cmd_gen(p, {}, out, log), 0);
  const auto echo = nlohmann::json::parse(log.str());
  EXPECT_NEAR(echo.at("gamma_max_nominal").get<double>(), 0.1371459425887159, 1e-15);
  // The coupling block raises the measured L_max a little above L.
  EXPECT_LE(echo.at("gamma_max").get<double>(), echo.at("gamma_max_nominal").get<double>());
  EXPECT_NEAR(echo.at("gamma_max").get<double>(), 0.1371, 1e-3);
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_EQ(doc.at("n"), 1);
  EXPECT_EQ(doc.at("config").at("command"), "gen");
}

TEST(Run, IdenticalFlagsGiveIdenticalBytes) {
  RunOptions r;
  r.problem = small_game();
  r.gamma = 1e-2;
  r.epochs = 30;
  r.perturb = true;
  GlobalOptions g;
  g.seed = 11;
  std::ostringstream a, b, log;
  cmd_run(r, g, a, log);
  cmd_run(r, g, b, log);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_GT(lines(a.str()).size(), 30u);
}

TEST(Run, ZeroStepIsConstant) {
  RunOptions r;
  r.problem = small_game();
  r.gamma = 0.0;
  r.epochs = 10;
  r.variant = "rrresh";
  std::ostringstream out, log;
  EXPECT_EQ(cmd_run(r, {}, out, log), 0);
  const auto rows = lines(out.str());
  ASSERT_EQ(rows.size(), 12u);
  for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_EQ(column(rows[k], 1), column(rows[1], 1));
}

TEST(Run, DivergenceExitsWithThree) {
  RunOptions r;
  r.problem = small_game();
  r.gamma = 100.0;
  r.epochs = 100;
  std::ostringstream out, log;
  EXPECT_EQ(cmd_run(r, {}, out, log), 3);
  EXPECT_NE(out.str().find("diverged"), std::string::npos);
}

TEST(Run, RejectsMismatchedSampling) {
  RunOptions r;
  r.problem = small_game();
  r.variant = "rrresh";
  r.sampling = "withrep";
  std::ostringstream out, log;
  EXPECT_THROW(cmd_run(r, {}, out, log), ParameterError);
}

TEST(Run, RepeatsAverageIntoOneCurve) {
  RunOptions r;
  r.problem = small_game();
  r.gamma = 1e-2;
  r.epochs = 5;
  r.repeats = 3;
  std::ostringstream out, log;
  EXPECT_EQ(cmd_run(r, {}, out, log), 0);
  EXPECT_EQ(lines(out.str()).size(), 7u);
  r.iterates_out = "/tmp/never_written.bin";
  EXPECT_THROW(cmd_run(r, {}, out, log), ParameterError);
}

TEST(Sweep, EmptyGammaListIsRejected) {
  SweepOptions s;
  s.problem = small_affine();
  std::ostringstream out, log;
  EXPECT_THROW(cmd_sweep(s, {}, out, log), ParameterError);
}

TEST(Sweep, InadmissibleGammaNamesTheBranch) {
  SweepOptions s;
  s.problem = small_game();
  s.suite = "mse";
  s.gammas = {1.0};
  std::ostringstream out, log;
  try {
    cmd_sweep(s, {}, out, log);
    FAIL() << "expected refusal";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("branch"), std::string::npos) << e.what();
  }
}

TEST(Sweep, BiasSuiteReportsTheSlopeGap) {
  SweepOptions s;
  s.problem = small_affine();
  s.gammas = {1e-3, 2e-3, 4e-3, 8e-3};
  std::ostringstream out, log;
  EXPECT_EQ(cmd_sweep(s, {}, out, log), 0);
  const auto summary = nlohmann::json::parse(log.str());
  EXPECT_GE(summary.at("slope_gap").get<double>(), 0.7);
  EXPECT_EQ(lines(out.str()).size(), 5u);
}

TEST(Clt, SingleTrialHasNoStatistics) {
  CltCommandOptions c;
  c.problem = small_game();
  c.T = {20};
  c.gammas = {1e-3};
  c.trials = 1;
  std::ostringstream out, log;
  EXPECT_EQ(cmd_clt(c, {}, out, log), 0);
  EXPECT_EQ(lines(out.str()).size(), 2u);
  const auto summary = nlohmann::json::parse(log.str());
  EXPECT_FALSE(summary.at("series")[0].contains("averaged_iqr"));
}

TEST(LemmaCheck, FourthMomentSuitePasses) {
  LemmaCheckOptions l;
  std::ostringstream out, log;
  EXPECT_EQ(cmd_lemma_check(l, {}, out, log), 0);
  const auto report = nlohmann::json::parse(out.str());
  EXPECT_TRUE(report.at("pass").get<bool>());
  EXPECT_EQ(report.at("instances"), 50);
}

TEST(LemmaCheck, LargeStepJacobianIsInformational) {
  LemmaCheckOptions l;
  l.suite = "jacobian";
  l.instances = 20;
  l.gamma_factor = 50.0;
  std::ostringstream out, log;
  EXPECT_EQ(cmd_lemma_check(l, {}, out, log), 0);
  const auto report = nlohmann::json::parse(out.str());
  EXPECT_TRUE(report.at("informational").get<bool>());
}

TEST(LemmaCheck, PropositionBoundsOnUnitConditionGame) {
  LemmaCheckOptions l;
  l.problem = small_game(20, 5);
  l.suite = "prop-bounds";
  std::ostringstream out, log;
  EXPECT_EQ(cmd_lemma_check(l, {}, out, log), 0);
  EXPECT_TRUE(nlohmann::json::parse(out.str()).at("pass").get<bool>());
}

TEST(LemmaCheck, UnknownSuite) {
  LemmaCheckOptions l;
  l.suite = "entropy";
  std::ostringstream out, log;
  EXPECT_THROW(cmd_lemma_check(l, {}, out, log), ParameterError);
}

TEST(Timing, ZeroEpochsAreFast) {
  TimingOptions t;
  t.problem = small_game(100, 20);
  t.epochs = 0;
  t.repeats = 1;
  const auto table = time_variants(build_problem(t.problem, 0), t);
  ASSERT_EQ(table.size(), 4u);
  for (const auto& row : table) EXPECT_LT(row.seconds, 0.01) << row.method;
}

TEST(Timing, SequentialExtrapolationCostsTwoChains) {
  TimingOptions t;
  t.problem = small_game(100, 20);
  t.epochs = 100;
  t.execution = "sequential";
  t.repeats = 5;
  const auto table = time_variants(build_problem(t.problem, 0), t);
  std::map<std::string, double> s;
  for (const auto& row : table) s[row.method] = row.seconds;
  EXPECT_NEAR(s.at("rrrom") / s.at("plain"), 2.0, 0.6);
  EXPECT_NEAR(s.at("rrrom-rrresh") / s.at("rrresh"), 2.0, 0.6);
}

TEST(Cli, HelpAndBadFlags) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("run --no-such-flag"), 2);
  EXPECT_EQ(run_cli(""), 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("run --n 5 --d 2 --gamma 1e-2 --epochs 3"), 0);
  EXPECT_EQ(run_cli("run --n 5 --d 2 --gamma 100 --epochs 200"), 3);
  EXPECT_EQ(run_cli("sweep --n 5 --d 2 --suite mse"), 2);
  EXPECT_EQ(run_cli("run --n 5 --d 2 --variant nope"), 2);
}

TEST(Cli, DeterministicBytesAndConfigFile) {
  std::string a, b, c;
  const std::string flags = "--seed 4 run --n 6 --d 2 --gamma 1e-2 --epochs 20 --perturb";
  ASSERT_EQ(run_cli(flags, &a), 0);
  ASSERT_EQ(run_cli(flags, &b), 0);
  EXPECT_EQ(a, b);
  const auto cfg = std::filesystem::temp_directory_path() / "rrvi_cli_test_config.json";
  {
    std::ofstream f(cfg);
    f << R"({"seed": 4, "run": {"n": 6, "d": 2, "gamma": 0.01, "epochs": 20, "perturb": true}})";
  }
  ASSERT_EQ(run_cli("--config " + cfg.string() + " run", &c), 0);
  std::filesystem::remove(cfg);
  EXPECT_EQ(a, c);
}
