#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <unistd.h>

#include "commands.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace seasonsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "seasonsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in{p, std::ios::binary};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is{text};
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

// One small fixture shared by the whole suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("seasonsim_cli_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fixture::FixtureOptions opt;
    opt.history_seasons = 2;
    opt.history_rounds = 45;
    fixture::write_fixture(root_ / "fx", opt);
    std::ofstream cfg{root_ / "fx" / "config.txt", std::ios::app};
    cfg << "training_filter = none\niterations = 3000\nburn_in = 500\nchains = 2\ntune_rounds = 4\n";
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string config() { return (root_ / "fx" / "config.txt").string(); }
  static fs::path dir(const std::string& name) { return root_ / name; }

  // fit + noise + simulate into `out`.
  static void pipeline(const fs::path& out, const std::string& threads) {
    for (const char* cmd : {"fit", "noise"})
      ASSERT_EQ(run_cli({cmd, "--config", config(), "--out", out.string(), "--threads", threads}).code, 0) << cmd;
    const auto sim = run_cli({"simulate", "--config", config(), "--out", out.string(), "--threads", threads,
                              "--replications", "100", "--team", "NYY", "--team", "SEA"});
    ASSERT_EQ(sim.code, 0) << sim.err;
  }

  static inline fs::path root_;
};

}  // namespace

TEST(ResolveConfig, FlagsOverrideFileOverrideDefaults) {
  const auto d = cli::resolve_config({}, {});
  EXPECT_EQ(d.seed, 20250520u);
  EXPECT_EQ(d.replications, 1000u);
  EXPECT_EQ(d.sim.probability, ProbabilityMode::marginal);
  EXPECT_EQ(d.sim.draws, DrawMode::posterior_predictive);
  EXPECT_EQ(d.chain.n_iterations, 20000u);
  EXPECT_DOUBLE_EQ(d.sim.walk.step_std, 0.0015);

  const cli::Settings file{{"seed", "7"}, {"replications", "50"}, {"mode", "two-stage"}};
  const auto f = cli::resolve_config(file, {});
  EXPECT_EQ(f.seed, 7u);
  EXPECT_EQ(f.sim.probability, ProbabilityMode::two_stage);
  const auto o = cli::resolve_config(file, {{"seed", "9"}});
  EXPECT_EQ(o.seed, 9u);
  EXPECT_EQ(o.replications, 50u);
}

TEST(ResolveConfig, RejectsBadValues) {
  EXPECT_THROW(cli::resolve_config({{"nope", "1"}}, {}), cli::UsageError);
  EXPECT_THROW(cli::resolve_config({{"mode", "sideways"}}, {}), cli::UsageError);
  EXPECT_THROW(cli::resolve_config({{"seed", "-3"}}, {}), cli::UsageError);
  EXPECT_THROW(cli::resolve_config({{"burn_in", "30000"}}, {}), cli::UsageError);
  EXPECT_THROW(cli::resolve_config({{"point_r", "1,2"}}, {}), cli::UsageError);
  EXPECT_EQ(cli::resolve_config({{"point_r", "1.5, 0.8,0.6"}}, {}).point_r, (Exponents{1.5, 0.8, 0.6}));
}

TEST_F(CliTest, ConfigFileResolvesRelativePaths) {
  const auto s = cli::read_config_file(config());
  EXPECT_EQ(fs::path(s.at("league")), root_ / "fx" / "league.csv");
  std::ofstream bad{dir("bad.txt")};
  bad << "colour = blue\n";
  bad.close();
  EXPECT_THROW(cli::read_config_file(dir("bad.txt")), cli::UsageError);
  EXPECT_EQ(run_cli({"validate", "--config", dir("bad.txt").string()}).code, cli::kUsageError);
  EXPECT_EQ(run_cli({"validate", "--config", dir("missing.txt").string()}).code, cli::kUsageError);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kUsageError);
  EXPECT_EQ(run_cli({"fly"}).code, cli::kUsageError);
  EXPECT_EQ(run_cli({"simulate", "--mode", "sideways"}).code, cli::kUsageError);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, ValidateCleanFixture) {
  const auto r = run_cli({"validate", "--config", config()});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out, "validation passed\n");
}

TEST_F(CliTest, ValidateNamesScheduleTeamOutsideLeague) {
  fs::copy_file(root_ / "fx" / "schedule.csv", dir("sched_bad.csv"), fs::copy_options::overwrite_existing);
  std::ofstream(dir("sched_bad.csv"), std::ios::app) << "2025-09-30,NYY,XXX\n";
  const auto r = run_cli({"validate", "--config", config(), "--schedule", dir("sched_bad.csv").string()});
  EXPECT_EQ(r.code, cli::kValidationFailure);
  EXPECT_NE(r.out.find("team XXX not in league structure"), std::string::npos) << r.out;
}

TEST_F(CliTest, ValidateNamesDuplicateTeam) {
  fs::copy_file(root_ / "fx" / "league.csv", dir("league_dup.csv"), fs::copy_options::overwrite_existing);
  std::ofstream(dir("league_dup.csv"), std::ios::app) << "NL,East,NYY\n";
  const auto r = run_cli({"validate", "--config", config(), "--league", dir("league_dup.csv").string()});
  EXPECT_EQ(r.code, cli::kValidationFailure);
  EXPECT_NE(r.out.find("team NYY appears in both"), std::string::npos) << r.out;
}

TEST_F(CliTest, FitWithoutGameLogIsUsageErrorWithoutOutputs) {
  const auto out = dir("fit_missing");
  auto r = run_cli({"fit", "--config", config(), "--out", out.string(), "--history", dir("nope.csv").string()});
  EXPECT_EQ(r.code, cli::kUsageError);
  EXPECT_FALSE(fs::exists(out));
  r = run_cli({"fit", "--out", out.string()});
  EXPECT_EQ(r.code, cli::kUsageError);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, FitReportsRowContextForBadLog) {
  std::ofstream(dir("bad_log.csv")) << "date,home,away,home_won,home_avg_pre,away_avg_pre,home_era_pre,away_era_pre\n"
                                    << "2024-06-01,NYY,BOS,1,0.25,0.25,abc,4.0\n";
  const auto r = run_cli({"fit", "--config", config(), "--out", dir("fit_bad").string(), "--history",
                          dir("bad_log.csv").string()});
  EXPECT_EQ(r.code, cli::kRuntimeError);
  EXPECT_NE(r.err.find("row 2, column home_era_pre"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir("fit_bad")));
}

TEST_F(CliTest, FitRecoversGridPosteriorMeans) {
  Rng rng{31};
  const auto games = synthetic::recovery_dataset(1200, {1.5, 0.8, 0.6}, rng);
  std::vector<RawGameRow> rows;
  for (const auto& g : games) {
    RawGameRow r;
    r.date = g.date;
    r.home = "NYY";
    r.away = "BOS";
    r.home_won = g.home_won;
    r.home_winpct = g.home.winpct;
    r.away_winpct = g.away.winpct;
    r.home_avg = g.home.avg;
    r.away_avg = g.away.avg;
    r.home_era = g.home.era;
    r.away_era = g.away.era;
    rows.push_back(r);
  }
  std::ostringstream log;
  write_game_log(log, rows);
  std::ofstream(dir("recovery.csv")) << log.str();

  // The oracle sees exactly what the command parses.
  std::istringstream back{log.str()};
  const LogRatioTable table{derive_pregame_records(parse_game_log(back))};
  std::vector<std::array<double, 3>> logs;
  std::vector<bool> won;
  for (std::size_t i = 0; i < table.size(); ++i) {
    logs.push_back(table.log_ratios(i));
    won.push_back(table.home_won(i));
  }
  const auto grid = oracle::grid_posterior_means(logs, won, 5.0, 25);

  const auto out = dir("fit_recovery");
  const auto r = run_cli({"fit", "--history", dir("recovery.csv").string(), "--out", out.string(), "--set",
                          "training_filter=none", "--set", "iterations=12000", "--set", "tune_rounds=8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto diag = lines(slurp(out / "diagnostics.csv"));
  ASSERT_EQ(diag.size(), 4u);
  EXPECT_EQ(diag[0], "parameter,mean,sd,q05,q95,split_rhat,ess");
  for (std::size_t p = 0; p < 3; ++p) {
    const auto f = csv::split(diag[p + 1]);
    EXPECT_NEAR(*csv::parse_double(f[1]), grid[p], 0.05) << f[0];
    EXPECT_LT(*csv::parse_double(f[5]), 1.1);
  }
  EXPECT_EQ(lines(slurp(out / "posterior_draws.csv")).size(), 1u + 4u * (12000u - 2000u) / 5u);
  for (int k = 0; k < 4; ++k) EXPECT_TRUE(fs::exists(out / ("trace_chain" + std::to_string(k) + ".csv")));
}

TEST_F(CliTest, FitFailsOnUnconvergedChains) {
  // A handful of iterations from overdispersed starts cannot mix.
  const auto r = run_cli({"fit", "--config", config(), "--out", dir("fit_short").string(), "--set", "iterations=40",
                          "--set", "burn_in=1", "--set", "thin=1", "--set", "chains=4", "--set", "tune_rounds=0",
                          "--set", "proposal_std=0.001"});
  EXPECT_EQ(r.code, cli::kValidationFailure);
  EXPECT_NE(r.err.find("R-hat"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir("fit_short") / "diagnostics.csv"));
}

TEST_F(CliTest, SimulateNamesMissingPrerequisites) {
  const auto out = dir("sim_missing");
  auto r = run_cli({"simulate", "--config", config(), "--out", out.string()});
  EXPECT_EQ(r.code, cli::kRuntimeError);
  EXPECT_NE(r.err.find("seasonsim fit"), std::string::npos) << r.err;
  r = run_cli({"simulate", "--config", config(), "--out", out.string(), "--draws", "point", "--set",
               "point_r=1,1,1"});
  EXPECT_EQ(r.code, cli::kRuntimeError);
  EXPECT_NE(r.err.find("seasonsim noise"), std::string::npos) << r.err;
}

TEST_F(CliTest, PipelineOutputsAndSchema) {
  const auto out = dir("run_a");
  pipeline(out, "1");

  // Tercile table: every season splits 10/10/10.
  std::map<std::pair<std::string, std::string>, int> counts;
  const auto terciles = lines(slurp(out / "terciles.csv"));
  EXPECT_EQ(terciles[0], "season,team,tercile,early_era");
  for (std::size_t i = 1; i < terciles.size(); ++i) {
    const auto f = csv::split(terciles[i]);
    ++counts[{f[0], f[2]}];
  }
  EXPECT_EQ(counts.size(), 6u);
  for (const auto& [k, n] : counts) EXPECT_EQ(n, 10) << k.first << ' ' << k.second;

  // Pool rows equal the converged-fit count in the run metadata.
  std::size_t pool_rows = 0;
  for (const char* t : {"low", "medium", "high"}) {
    const auto l = lines(slurp(out / ("noise_pool_" + std::string(t) + ".csv")));
    EXPECT_EQ(l[0], "team,window_start,sigma_obs,sigma_process,converged");
    pool_rows += l.size() - 1;
  }
  EXPECT_NE(slurp(out / "noise_run.txt").find("converged = " + std::to_string(pool_rows) + "\n"), std::string::npos);

  // Summary: paper column set, descending means, percentages in range.
  const auto summary = lines(slurp(out / "summary.csv"));
  ASSERT_EQ(summary.size(), 31u);
  EXPECT_EQ(summary[0], "Team,MeanWins,CI5,CI95,PlayoffPct");
  double prev = 1e9;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const auto f = csv::split(summary[i]);
    const double mean = *csv::parse_double(f[1]);
    EXPECT_LE(mean, prev);
    prev = mean;
    const double pct = *csv::parse_double(f[4]);
    EXPECT_GE(pct, 0.0);
    EXPECT_LE(pct, 100.0);
  }

  // League-mean wins is exactly 81 from the replication table.
  const auto reps = lines(slurp(out / "replications.csv"));
  ASSERT_EQ(reps.size(), 1u + 100u * 30u);
  long total = 0;
  for (std::size_t i = 1; i < reps.size(); ++i) total += *csv::parse_int<int>(csv::split(reps[i])[2]);
  EXPECT_EQ(total, 100L * 2430L);

  for (const char* team : {"NYY", "SEA"}) {
    const auto h = lines(slurp(out / ("hist_" + std::string(team) + ".csv")));
    std::size_t sum = 0;
    for (std::size_t i = 1; i < h.size(); ++i) sum += *csv::parse_int<std::size_t>(csv::split(h[i])[1]);
    EXPECT_EQ(sum, 100u);
  }
  const auto meta = slurp(out / "simulate_run.txt");
  EXPECT_NE(meta.find("schedule = file\n"), std::string::npos);
  EXPECT_NE(meta.find("seed = 2025\n"), std::string::npos);

  // report re-renders the same summary.
  const auto before = slurp(out / "summary.csv");
  const auto rep = run_cli({"report", "--config", config(), "--out", out.string(), "--team", "NYY"});
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(slurp(out / "summary.csv"), before);
  EXPECT_EQ(lines(rep.out)[0], "Team    Mean Wins     90% CI (5, 95)  Playoff %");

  const auto bad = run_cli({"simulate", "--config", config(), "--out", out.string(), "--team", "XYZ"});
  EXPECT_EQ(bad.code, cli::kUsageError);
}

TEST_F(CliTest, SyntheticScheduleIsFlagged) {
  const auto out = dir("run_synth");
  ASSERT_EQ(run_cli({"noise", "--config", config(), "--out", out.string()}).code, 0);
  const auto r = run_cli({"simulate", "--config", config(), "--out", out.string(), "--draws", "point", "--set",
                          "point_r=1.5,0.8,0.6", "--set", "schedule=", "--replications", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("synthetic"), std::string::npos);
  EXPECT_NE(slurp(out / "simulate_run.txt").find("schedule = synthetic\n"), std::string::npos);
  const auto reps = lines(slurp(out / "replications.csv"));
  long total = 0;
  for (std::size_t i = 1; i < reps.size(); ++i) total += *csv::parse_int<int>(csv::split(reps[i])[2]);
  EXPECT_EQ(total, 20L * 2430L);
}

TEST_F(CliTest, PipelineIsByteIdenticalAcrossRunsAndThreads) {
  pipeline(dir("det_1"), "1");
  pipeline(dir("det_1b"), "1");
  pipeline(dir("det_4"), "4");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir("det_1"))) names.push_back(e.path().filename().string());
  ASSERT_GE(names.size(), 15u);
  for (const auto& n : names) {
    const auto a = slurp(dir("det_1") / n);
    EXPECT_EQ(a, slurp(dir("det_1b") / n)) << n;
    EXPECT_EQ(a, slurp(dir("det_4") / n)) << n;
  }
}
