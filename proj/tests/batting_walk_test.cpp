#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "seasonsim/batting_walk.hpp"

using namespace seasonsim;

TEST(EstimateStepStd, ArithmeticSequenceHasZeroSpread) {
  std::vector<double> s;
  for (int i = 0; i < 20; ++i) s.push_back(0.240 + 0.001 * i);
  const auto est = estimate_step_std(s);
  EXPECT_NEAR(est.step_std, 0.0, 1e-12);
  EXPECT_TRUE(est.degenerate);
}

TEST(EstimateStepStd, ConstantSeriesIsDegenerate) {
  const std::vector<double> s(10, 0.255);
  const auto est = estimate_step_std(s);
  EXPECT_EQ(est.step_std, 0.0);
  EXPECT_TRUE(est.degenerate);
}

TEST(EstimateStepStd, AlternatingIncrementsClosedForm) {
  // Increments +d, -d over 2k steps: mean 0, sample sd d * sqrt(2k / (2k - 1)).
  const double d = 0.002;
  for (int k : {2, 5, 40}) {
    std::vector<double> s{0.25};
    for (int i = 0; i < 2 * k; ++i) s.push_back(s.back() + (i % 2 == 0 ? d : -d));
    const auto est = estimate_step_std(s);
    EXPECT_NEAR(est.step_std, d * std::sqrt(2.0 * k / (2.0 * k - 1.0)), 1e-12) << "k=" << k;
    EXPECT_FALSE(est.degenerate);
  }
}

TEST(EstimateStepStd, RecoversSimulatedStep) {
  Rng rng{2025};
  std::vector<double> s{0.25};
  for (int i = 0; i < 10'000; ++i) s.push_back(s.back() + normal(rng, 0.0, 0.0015));
  EXPECT_NEAR(estimate_step_std(s).step_std, 0.0015, 0.05 * 0.0015);
}

TEST(EstimateStepStd, RejectsShortSeries) {
  EXPECT_THROW(estimate_step_std(std::vector<double>{0.25, 0.26}), std::invalid_argument);
}

TEST(EstimatePooledStepStd, PoolsIncrementsAcrossTeams) {
  const std::vector<std::vector<double>> series{{0.25, 0.252, 0.25}, {0.26, 0.258, 0.26}};
  // Increments {+d, -d, -d, +d}: sample sd d * sqrt(4/3).
  EXPECT_NEAR(estimate_pooled_step_std(series).step_std, 0.002 * std::sqrt(4.0 / 3.0), 1e-12);
}

TEST(SimulateWalk, ZeroStepsKeepsStart) {
  Rng rng{1};
  const auto path = simulate_walk(0.004, 0, WalkConfig{}, rng);
  ASSERT_EQ(path.deviations.size(), 1u);
  EXPECT_EQ(path.deviations[0], 0.004);
  EXPECT_DOUBLE_EQ(path.averages[0], 0.254);
}

TEST(SimulateWalk, TinyStepIsEffectivelyConstant) {
  Rng rng{2};
  WalkConfig cfg;
  cfg.step_std = 1e-12;
  const auto path = simulate_walk(-0.01, 500, cfg, rng);
  for (double d : path.deviations) EXPECT_NEAR(d, -0.01, 1e-9);
}

TEST(SimulateWalk, AveragesRespectClampBounds) {
  Rng rng{3};
  WalkConfig cfg;
  cfg.step_std = 0.02;  // large enough to hit both bounds
  const auto path = simulate_walk(0.0, 5'000, cfg, rng);
  bool hit_low = false, hit_high = false;
  for (double a : path.averages) {
    EXPECT_GE(a, cfg.clamp_low);
    EXPECT_LE(a, cfg.clamp_high);
    hit_low |= a == cfg.clamp_low;
    hit_high |= a == cfg.clamp_high;
  }
  EXPECT_TRUE(hit_low || hit_high);
  // Deviations themselves are never clamped.
  const auto inc = path.increments();
  EXPECT_EQ(inc.size(), 5'000u);
}

TEST(SimulateWalk, DeterministicGivenSeed) {
  Rng a{99}, b{99};
  EXPECT_EQ(simulate_walk(0.0, 50, WalkConfig{}, a).deviations, simulate_walk(0.0, 50, WalkConfig{}, b).deviations);
}

TEST(SimulateWalk, RejectsInvalidConfig) {
  Rng rng{4};
  WalkConfig cfg;
  cfg.clamp_low = 0.3;
  EXPECT_THROW(simulate_walk(0.0, 10, cfg, rng), std::invalid_argument);
  cfg = WalkConfig{};
  cfg.step_std = 0.0;
  EXPECT_THROW(simulate_walk(0.0, 10, cfg, rng), std::invalid_argument);
}

// Variance grows linearly and the walk is a martingale.
TEST(WalkProperties, LinearVarianceGrowthAndZeroDrift) {
  const WalkConfig cfg{0.0015, 0.25, 0.15, 0.40};
  const int paths = 10'000;
  const std::vector<std::size_t> checkpoints{1, 10, 50, 100};
  std::vector<double> sum(checkpoints.size(), 0.0), sumsq(checkpoints.size(), 0.0);
  Rng rng{31337};
  for (int p = 0; p < paths; ++p) {
    const auto path = simulate_walk(0.01, 100, cfg, rng);
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const double delta = path.deviations[checkpoints[c]] - path.deviations[0];
      sum[c] += delta;
      sumsq[c] += delta * delta;
    }
  }
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double t = static_cast<double>(checkpoints[c]);
    const double mean = sum[c] / paths;
    const double var = sumsq[c] / paths - mean * mean;
    const double theory = t * cfg.step_std * cfg.step_std;
    EXPECT_NEAR(mean, 0.0, 4 * std::sqrt(theory / paths)) << "t=" << t;
    EXPECT_NEAR(var, theory, 0.05 * theory) << "t=" << t;
  }
}
