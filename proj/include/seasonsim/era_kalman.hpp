#pragma once

// Local-level state-space model for starting-pitcher ERA:
//
//   x_{t+1} = x_t + w_t,   w_t ~ N(0, sigma_process^2)
//   y_t     = x_t + v_t,   v_t ~ N(0, sigma_obs^2)
//
// Filtering, forecast by pure propagation, sliding-window maximum-likelihood
// noise estimation, tercile grouping and synthetic path generation.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seasonsim/nelder_mead.hpp"
#include "seasonsim/random.hpp"
#include "seasonsim/stats.hpp"

namespace seasonsim {

inline constexpr double kEraFloor = 0.01;

struct KalmanState {
  double mean = 0.0;
  double variance = 0.0;
};

struct NoiseParams {
  double sigma_obs = 0.0;
  double sigma_process = 0.0;

  void validate() const {
    if (!(sigma_obs >= 0.0) || !(sigma_process >= 0.0) || !std::isfinite(sigma_obs) ||
        !std::isfinite(sigma_process))
      throw std::invalid_argument("NoiseParams: noise scales must be finite and nonnegative");
  }
};

struct NoiseEstimate {
  std::string team;
  std::size_t window_start = 0;
  NoiseParams params;
  bool converged = false;
  bool degenerate = false;  // zero-variance window; params are both 0
  double log_likelihood = 0.0;
};

inline KalmanState filter_step(const KalmanState& state, double observation, const NoiseParams& noise) {
  noise.validate();
  const double predicted_var = state.variance + noise.sigma_process * noise.sigma_process;
  const double innovation_var = predicted_var + noise.sigma_obs * noise.sigma_obs;
  if (!(innovation_var > 0.0))
    throw std::domain_error("filter_step: gain undefined with zero observation and state variance");
  const double gain = predicted_var / innovation_var;
  KalmanState out;
  out.mean = state.mean + gain * (observation - state.mean);
  out.variance = std::min(predicted_var * (1.0 - gain), predicted_var);
  return out;
}

struct FilterOutput {
  std::vector<KalmanState> filtered;
  // One-step-ahead state prediction (mean, variance) before each update.
  std::vector<KalmanState> predicted;
  // Innovation variance F_t = predicted variance + sigma_obs^2.
  std::vector<double> innovation_variance;
};

inline FilterOutput filter_series(const KalmanState& init, std::span<const double> observations,
                                  const NoiseParams& noise) {
  if (observations.empty()) throw std::invalid_argument("filter_series: no observations");
  FilterOutput out;
  out.filtered.reserve(observations.size());
  out.predicted.reserve(observations.size());
  out.innovation_variance.reserve(observations.size());
  const double q = noise.sigma_process * noise.sigma_process;
  const double r = noise.sigma_obs * noise.sigma_obs;
  KalmanState state = init;
  for (double y : observations) {
    out.predicted.push_back({state.mean, state.variance + q});
    out.innovation_variance.push_back(state.variance + q + r);
    state = filter_step(state, y, noise);
    out.filtered.push_back(state);
  }
  return out;
}

// Mean constant, variance growing by sigma_process^2 per step; steps 1..horizon.
inline std::vector<KalmanState> forecast(const KalmanState& state, std::size_t horizon,
                                         const NoiseParams& noise) {
  std::vector<KalmanState> out;
  out.reserve(horizon);
  const double q = noise.sigma_process * noise.sigma_process;
  for (std::size_t h = 1; h <= horizon; ++h)
    out.push_back({state.mean, state.variance + static_cast<double>(h) * q});
  return out;
}

// Diffuse start for a window: first observation, 10x the sample variance.
inline KalmanState diffuse_initial_state(std::span<const double> window) {
  return {window.front(), 10.0 * stats::variance(window)};
}

// Gaussian prediction-error log likelihood. The first observation only seeds
// the diffuse start and contributes no term.
inline double prediction_error_log_likelihood(std::span<const double> window, const NoiseParams& noise) {
  if (window.size() < 2) throw std::invalid_argument("prediction_error_log_likelihood: window too short");
  const auto out = filter_series(diffuse_initial_state(window), window, noise);
  double ll = 0.0;
  for (std::size_t t = 1; t < window.size(); ++t) {
    const double f = out.innovation_variance[t];
    const double v = window[t] - out.predicted[t].mean;
    ll -= 0.5 * (std::log(2.0 * std::numbers::pi * f) + v * v / f);
  }
  return ll;
}

inline constexpr std::size_t kMinNoiseWindow = 10;
inline constexpr double kSigmaLowerBound = 1e-4;
inline constexpr double kSigmaUpperBound = 10.0;

// Maximum-likelihood (sigma_obs, sigma_process) for one window, searched on
// log scale within [1e-4, 10] from three starts.
inline NoiseEstimate estimate_noise(std::span<const double> window) {
  if (window.size() < kMinNoiseWindow)
    throw std::invalid_argument("estimate_noise: window needs at least " +
                                std::to_string(kMinNoiseWindow) + " observations");
  NoiseEstimate est;
  const double var = stats::variance(window);
  const double scale = std::max(1.0, std::abs(stats::mean(window)));
  if (var <= 1e-24 * scale * scale) {
    est.degenerate = true;
    est.converged = false;
    return est;
  }

  const double lo = std::log(kSigmaLowerBound);
  const double hi = std::log(kSigmaUpperBound);
  optim::NelderMeadOptions<2> opt;
  opt.lower = {lo, lo};
  opt.upper = {hi, hi};

  auto objective = [&](const std::array<double, 2>& theta) {
    return -prediction_error_log_likelihood(window, {std::exp(theta[0]), std::exp(theta[1])});
  };
  const double ls = 0.5 * std::log(var);
  const std::array<std::array<double, 2>, 3> starts{{
      {ls, ls - std::log(10.0)},
      {ls - std::log(2.0), ls - std::log(2.0)},
      {ls - std::log(10.0), ls},
  }};

  optim::MinimizeResult<2> best;
  bool have = false;
  for (auto s : starts) {
    for (auto& v : s) v = std::clamp(v, lo, hi);
    const auto r = optim::nelder_mead(objective, s, opt);
    if (!have || r.value < best.value) {
      best = r;
      have = true;
    }
  }
  est.params = {std::exp(best.x[0]), std::exp(best.x[1])};
  est.converged = best.converged && std::isfinite(best.value);
  est.log_likelihood = -best.value;
  return est;
}

inline std::vector<NoiseEstimate> sliding_noise_estimates(std::span<const double> series,
                                                          std::size_t window_len,
                                                          const std::string& team = {}) {
  if (window_len == 0) throw std::invalid_argument("sliding_noise_estimates: window_len must be positive");
  if (series.size() < window_len)
    throw std::invalid_argument("sliding_noise_estimates: series shorter than window");
  std::vector<NoiseEstimate> out;
  out.reserve(series.size() - window_len + 1);
  for (std::size_t start = 0; start + window_len <= series.size(); ++start) {
    auto est = estimate_noise(series.subspan(start, window_len));
    est.team = team;
    est.window_start = start;
    out.push_back(std::move(est));
  }
  return out;
}

enum class Tercile { low, medium, high };

inline std::string_view to_string(Tercile t) {
  switch (t) {
    case Tercile::low: return "low";
    case Tercile::medium: return "medium";
    case Tercile::high: return "high";
  }
  return "low";
}

inline std::optional<Tercile> parse_tercile(std::string_view s) {
  if (s == "low") return Tercile::low;
  if (s == "medium") return Tercile::medium;
  if (s == "high") return Tercile::high;
  return std::nullopt;
}

inline constexpr std::array<Tercile, 3> kTerciles{Tercile::low, Tercile::medium, Tercile::high};

struct TercileGrouping {
  std::vector<std::string> low;
  std::vector<std::string> medium;
  std::vector<std::string> high;

  const std::vector<std::string>& group(Tercile t) const {
    return t == Tercile::low ? low : t == Tercile::medium ? medium : high;
  }

  std::optional<Tercile> find(const std::string& team) const {
    for (auto t : kTerciles) {
      const auto& g = group(t);
      if (std::find(g.begin(), g.end(), team) != g.end()) return t;
    }
    return std::nullopt;
  }
};

// Ascending early-season ERA, ties by team identifier; the remainder of an
// uneven split goes to the lower terciles.
inline TercileGrouping group_terciles(const std::map<std::string, double>& early_eras) {
  if (early_eras.size() < 3) throw std::invalid_argument("group_terciles: need at least 3 teams");
  std::vector<std::pair<std::string, double>> teams(early_eras.begin(), early_eras.end());
  std::stable_sort(teams.begin(), teams.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  const std::size_t n = teams.size();
  const std::size_t base = n / 3;
  const std::size_t extra = n % 3;
  const std::size_t n_low = base + (extra > 0 ? 1 : 0);
  const std::size_t n_mid = base + (extra > 1 ? 1 : 0);
  TercileGrouping g;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_low ? g.low : i < n_low + n_mid ? g.medium : g.high;
    dst.push_back(teams[i].first);
  }
  return g;
}

inline NoiseParams sample_noise(std::span<const NoiseParams> pool, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("sample_noise: empty pool");
  return pool[uniform_index(rng, pool.size())];
}

// Converged window estimates pooled per tercile.
class NoisePools {
 public:
  void add(Tercile t, const NoiseEstimate& est) {
    if (est.converged && !est.degenerate) pools_[index(t)].push_back(est.params);
  }
  void add(Tercile t, const NoiseParams& params) { pools_[index(t)].push_back(params); }

  const std::vector<NoiseParams>& pool(Tercile t) const { return pools_[index(t)]; }

  NoiseParams sample(Tercile t, Rng& rng) const {
    const auto& p = pool(t);
    if (p.empty())
      throw std::invalid_argument("sample_noise: empty pool for tercile " + std::string(to_string(t)));
    return sample_noise(p, rng);
  }

  bool empty() const {
    return std::all_of(pools_.begin(), pools_.end(), [](const auto& p) { return p.empty(); });
  }

 private:
  static std::size_t index(Tercile t) { return static_cast<std::size_t>(t); }
  std::array<std::vector<NoiseParams>, 3> pools_;
};

struct EraPath {
  std::vector<double> latent;    // x_t, floored on output
  std::vector<double> observed;  // y_t = x_t + v_t, floored on output
};

inline EraPath simulate_era_path(double init_mean, const NoiseParams& noise, std::size_t n_steps, Rng& rng) {
  if (!(init_mean >= 0.0) || !std::isfinite(init_mean))
    throw std::invalid_argument("simulate_era_path: init_mean must be nonnegative");
  noise.validate();
  EraPath path;
  path.latent.reserve(n_steps);
  path.observed.reserve(n_steps);
  double x = init_mean;
  for (std::size_t t = 0; t < n_steps; ++t) {
    const double y = x + normal(rng, 0.0, noise.sigma_obs);
    path.latent.push_back(std::max(x, kEraFloor));
    path.observed.push_back(std::max(y, kEraFloor));
    x += normal(rng, 0.0, noise.sigma_process);
  }
  return path;
}

}  // namespace seasonsim
