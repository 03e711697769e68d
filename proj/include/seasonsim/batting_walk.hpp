#pragma once

// Team batting average as a zero-centred Gaussian random walk around the
// league mean.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "seasonsim/random.hpp"
#include "seasonsim/stats.hpp"

namespace seasonsim {

struct WalkConfig {
  double step_std = 0.0015;
  double league_mean = 0.250;
  double clamp_low = 0.150;
  double clamp_high = 0.400;

  void validate() const {
    if (!(step_std > 0.0) || !std::isfinite(step_std))
      throw std::invalid_argument("WalkConfig: step_std must be positive");
    if (!(0.0 < clamp_low && clamp_low < league_mean && league_mean < clamp_high && clamp_high < 1.0))
      throw std::invalid_argument("WalkConfig: need 0 < low < league_mean < high < 1");
  }

  double implied_average(double deviation) const {
    return std::clamp(league_mean + deviation, clamp_low, clamp_high);
  }
};

struct BattingPath {
  double start_deviation = 0.0;
  std::vector<double> deviations;  // deviations[0] == start_deviation
  std::vector<double> averages;    // league_mean + deviation, clamped

  std::vector<double> increments() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < deviations.size(); ++i) out.push_back(deviations[i] - deviations[i - 1]);
    return out;
  }
};

struct StepEstimate {
  double step_std = 0.0;
  bool degenerate = false;  // zero-variance increments
};

// Sample standard deviation of the first differences.
inline StepEstimate estimate_step_std(std::span<const double> series) {
  if (series.size() < 3) throw std::invalid_argument("estimate_step_std: need at least 3 values");
  std::vector<double> diffs(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) diffs[i - 1] = series[i] - series[i - 1];
  const double sd = stats::stddev(diffs);
  const double scale = std::max(1.0, std::abs(stats::mean(diffs)));
  if (sd <= 1e-12 * scale) return {0.0, true};
  return {sd, false};
}

// Pooled step estimate across exchangeable team series (each already
// centred or not; only differences matter).
inline StepEstimate estimate_pooled_step_std(const std::vector<std::vector<double>>& series) {
  std::vector<double> diffs;
  for (const auto& s : series)
    for (std::size_t i = 1; i < s.size(); ++i) diffs.push_back(s[i] - s[i - 1]);
  if (diffs.size() < 2) throw std::invalid_argument("estimate_pooled_step_std: too few increments");
  const double sd = stats::stddev(diffs);
  if (sd <= 1e-12) return {0.0, true};
  return {sd, false};
}

inline double walk_step(double deviation, const WalkConfig& cfg, Rng& rng) {
  return deviation + normal(rng, 0.0, cfg.step_std);
}

inline BattingPath simulate_walk(double start_deviation, std::size_t n_steps, const WalkConfig& cfg,
                                 Rng& rng) {
  cfg.validate();
  BattingPath path;
  path.start_deviation = start_deviation;
  path.deviations.reserve(n_steps + 1);
  path.deviations.push_back(start_deviation);
  for (std::size_t t = 0; t < n_steps; ++t)
    path.deviations.push_back(walk_step(path.deviations.back(), cfg, rng));
  path.averages.reserve(path.deviations.size());
  for (double d : path.deviations) path.averages.push_back(cfg.implied_average(d));
  return path;
}

}  // namespace seasonsim
