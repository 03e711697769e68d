#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "seasonsim/mcmc.hpp"
#include "seasonsim/synthetic.hpp"

using namespace seasonsim;

namespace {

std::vector<GameRecord> even_games(std::size_t n) {
  std::vector<GameRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].home_team = "HOM";
    out[i].away_team = "AWY";
    out[i].home_won = i % 2 == 0;
  }
  return out;
}

PosteriorDraws fake_draws(std::size_t n) {
  PosteriorDraws d;
  for (std::size_t i = 0; i < n; ++i) {
    d.draws.push_back({0.01 * static_cast<double>((i * 37) % 101), 1.0 + std::sin(static_cast<double>(i)),
                       static_cast<double>(i % 7)});
    d.iterations.push_back(100 + 5 * i);
  }
  return d;
}

}  // namespace

TEST(RunChain, ConstantLikelihoodRecoversPrior) {
  const PriorConfig prior{5.0};
  ChainConfig cfg;
  cfg.n_iterations = 40'000;
  cfg.burn_in = 2'000;
  cfg.thin = 5;
  cfg.tune_rounds = 10;
  cfg.seed = 2024;
  const auto draws = run_chain(even_games(50), prior, cfg);
  for (std::size_t p = 0; p < 3; ++p) {
    const auto col = draws.column(p);
    const double ess = stats::effective_sample_size(col);
    ASSERT_GT(ess, 100.0);
    EXPECT_NEAR(stats::mean(col), prior.r_max / 2, 3 * prior.r_max / std::sqrt(12 * ess)) << "param " << p;
  }
}

TEST(RunChain, AgreesWithGridPosterior) {
  Rng rng{77};
  const Exponents truth{1.5, 0.8, 0.6};
  const auto games = synthetic::recovery_dataset(1500, truth, rng);
  const LogRatioTable table{games};
  std::vector<std::array<double, 3>> logs;
  std::vector<bool> won;
  for (std::size_t i = 0; i < table.size(); ++i) {
    logs.push_back(table.log_ratios(i));
    won.push_back(table.home_won(i));
  }
  const PriorConfig prior{5.0};
  const auto grid = oracle::grid_posterior_means(logs, won, prior.r_max, 25);

  ChainConfig cfg;
  cfg.n_iterations = 12'000;
  cfg.burn_in = 2'000;
  cfg.thin = 5;
  cfg.tune_rounds = 8;
  cfg.seed = 9;
  const auto chains = run_chains(table, prior, cfg, 4);
  const auto mean = posterior_mean(chains);
  for (std::size_t p = 0; p < 3; ++p) EXPECT_NEAR(mean[p], grid[p], 0.05) << "param " << p;
  const auto rhat = split_rhat(chains);
  for (double r : rhat) EXPECT_LT(r, 1.05);
  for (const auto& c : chains) {
    EXPECT_GE(c.acceptance_rate, 0.1);
    EXPECT_LE(c.acceptance_rate, 0.6);
  }
}

TEST(RunChain, DrawsStayInsidePriorBox) {
  Rng rng{3};
  const auto games = synthetic::recovery_dataset(200, {4.9, 0.0, 2.0}, rng);
  const PriorConfig prior{2.5};
  ChainConfig cfg;
  cfg.n_iterations = 5'000;
  cfg.burn_in = 100;
  cfg.thin = 1;
  cfg.proposal_std = {0.8, 0.8, 0.8};
  const auto d = run_chain(games, prior, cfg);
  for (const auto& r : d.draws) EXPECT_TRUE(prior.contains(r));
  EXPECT_EQ(d.draws.size(), 4'900u);
  EXPECT_EQ(d.iterations.front(), 100u);
}

TEST(RunChain, RejectsBadConfigurations) {
  const PriorConfig prior{5.0};
  ChainConfig cfg;
  cfg.n_iterations = 100;
  cfg.burn_in = 100;
  EXPECT_THROW(run_chain(even_games(10), prior, cfg), std::invalid_argument);
  cfg.burn_in = 10;
  EXPECT_THROW(run_chain(std::vector<GameRecord>{}, prior, cfg), std::invalid_argument);
  cfg.thin = 0;
  EXPECT_THROW(run_chain(even_games(10), prior, cfg), std::invalid_argument);
}

TEST(RunChains, SingleChainMatchesRunChainWithDerivedSeed) {
  Rng rng{12};
  const auto games = synthetic::recovery_dataset(300, {1, 1, 1}, rng);
  const PriorConfig prior{5.0};
  ChainConfig cfg;
  cfg.n_iterations = 2'000;
  cfg.burn_in = 200;
  cfg.seed = 555;
  const auto chains = run_chains(games, prior, cfg, 1);
  ChainConfig derived = cfg;
  derived.seed = chain_seed(cfg.seed, 0);
  const auto single = run_chain(games, prior, derived);
  ASSERT_EQ(chains.size(), 1u);
  EXPECT_EQ(chains[0].draws, single.draws);
  EXPECT_EQ(chains[0].accepted, single.accepted);
}

TEST(RunChains, DeterministicAndThreadIndependent) {
  Rng rng{13};
  const auto games = synthetic::recovery_dataset(300, {1.2, 0.5, 0.9}, rng);
  const PriorConfig prior{5.0};
  ChainConfig cfg;
  cfg.n_iterations = 3'000;
  cfg.burn_in = 300;
  cfg.tune_rounds = 3;
  cfg.seed = 8;
  const auto a = run_chains(games, prior, cfg, 4, 1);
  const auto b = run_chains(games, prior, cfg, 4, 1);
  const auto c = run_chains(games, prior, cfg, 4, 4);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a[k].draws, b[k].draws);
    EXPECT_EQ(a[k].draws, c[k].draws);
    EXPECT_EQ(a[k].chain_id, static_cast<int>(k));
  }
  // Overdispersed starts differ from the primary chain's (1, 1, 1).
  EXPECT_EQ(a[0].start, (Exponents{1, 1, 1}));
  EXPECT_NE(a[1].start, a[0].start);
}

TEST(ComputeRhat, IdenticalChainsGiveOne) {
  std::vector<double> s;
  for (int i = 0; i < 200; ++i) s.push_back(std::sin(0.37 * i) + 0.01 * i);
  EXPECT_NEAR(compute_rhat({s, s}), 1.0, 1e-12);
}

TEST(ComputeRhat, DisjointConstantLevelsDiverge) {
  const std::vector<double> low(100, 0.0), high(100, 1.0);
  EXPECT_GT(compute_rhat({low, high}), 1.5);
}

TEST(ComputeRhat, AllConstantIsOne) {
  const std::vector<double> c(50, 2.5);
  EXPECT_EQ(compute_rhat({c, c, c}), 1.0);
}

TEST(ComputeRhat, SingleSequenceIsSplitInHalves) {
  std::vector<double> s;
  for (int i = 0; i < 101; ++i) s.push_back(std::cos(0.3 * i) + (i < 50 ? 0.0 : 0.5));
  const std::vector<double> first(s.begin(), s.begin() + 50);
  const std::vector<double> second(s.end() - 50, s.end());
  EXPECT_DOUBLE_EQ(compute_rhat({s}), compute_rhat({first, second}));
}

TEST(ComputeRhat, DirectFormula) {
  // Two sequences with means 0 and 1 and within-variance 1 each:
  // sqrt((W + B/n) / W) with B/n = var(means) = 0.5.
  const std::vector<double> a{-1, 1, -1, 1}, b{0, 2, 0, 2};
  const double w = 4.0 / 3.0;
  EXPECT_NEAR(compute_rhat({a, b}), std::sqrt((w + 0.5) / w), 1e-12);
}

TEST(ComputeRhat, RejectsShortOrRaggedInput) {
  EXPECT_THROW(compute_rhat({{1, 2, 3}}), std::invalid_argument);
  EXPECT_THROW(compute_rhat({{1, 2, 3, 4}, {1, 2, 3}}), std::invalid_argument);
}

TEST(ExportTrace, ShapeAndSummaries) {
  const auto d = fake_draws(100);
  const auto t = export_trace(d);
  ASSERT_EQ(t.rows.size(), 100u);
  EXPECT_EQ(t.rows[3].iteration, 115u);
  for (std::size_t p = 0; p < 3; ++p) {
    auto col = d.column(p);
    double sum = 0.0;
    for (double v : col) sum += v;
    EXPECT_NEAR(t.summary[p].mean, sum / 100.0, 1e-12);
    EXPECT_EQ(t.summary[p].q05, oracle::nearest_rank(col, 0.05));
    EXPECT_EQ(t.summary[p].q95, oracle::nearest_rank(col, 0.95));
    EXPECT_LE(t.summary[p].q05, t.summary[p].q95);
  }
  std::ostringstream os;
  write_trace_csv(os, t);
  const auto text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iteration,r1,r2,r3");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 101);
}

TEST(ExportTrace, RejectsEmptyDraws) { EXPECT_THROW(export_trace(PosteriorDraws{}), std::invalid_argument); }

TEST(BoundaryWarnings, FlagsMeansNearUpperBound) {
  const PriorConfig prior{5.0};
  EXPECT_TRUE(boundary_warnings({1.0, 2.0, 3.0}, prior).empty());
  const auto w = boundary_warnings({4.95, 2.0, 4.91}, prior);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NE(w[0].find("r1"), std::string::npos);
  EXPECT_NE(w[1].find("r3"), std::string::npos);
}

TEST(EffectiveSampleSize, IndependentDrawsNearN) {
  Rng rng{5};
  std::vector<double> xs(4000);
  for (auto& x : xs) x = normal(rng, 0, 1);
  const double ess = stats::effective_sample_size(xs);
  EXPECT_GT(ess, 3000.0);
  EXPECT_LT(ess, 5500.0);
}

TEST(EffectiveSampleSize, Ar1ChainMatchesTheory) {
  // AR(1) with phi = 0.9 has integrated autocorrelation time (1+phi)/(1-phi) = 19.
  Rng rng{6};
  std::vector<double> xs(200'000);
  double x = 0.0;
  for (auto& v : xs) {
    x = 0.9 * x + normal(rng, 0, 1);
    v = x;
  }
  const double ess = stats::effective_sample_size(xs);
  EXPECT_NEAR(static_cast<double>(xs.size()) / ess, 19.0, 2.0);
}
