#pragma once

// Small descriptive-statistics toolkit: moments, nearest-rank quantiles,
// autocorrelation-based effective sample size, and a one-sample KS distance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace seasonsim::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  // Kahan summation keeps long Monte Carlo sums stable.
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(xs.size());
}

// Unbiased (n - 1) sample variance.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance: need at least two values");
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(xs.size() - 1);
}

inline double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

// Nearest-rank quantile: the ceil(q * n)-th order statistic (1-based), the
// minimum for q == 0. No interpolation.
inline double quantile_nearest_rank(std::span<const double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
  const auto n = xs.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  std::vector<double> work(xs.begin(), xs.end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

// Effective sample size of one chain using Geyer's initial monotone
// positive sequence over lag autocorrelations.
inline double effective_sample_size(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) throw std::invalid_argument("effective_sample_size: need at least 4 draws");
  const double mu = mean(xs);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = xs[i] - mu;
  const double c0 =
      std::inner_product(centered.begin(), centered.end(), centered.begin(), 0.0) /
      static_cast<double>(n);
  if (c0 <= 0.0) return static_cast<double>(n);

  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
    return s / static_cast<double>(n) / c0;
  };

  double tau = -1.0;  // becomes 1 + 2 * sum(rho_k) once the first pair is added
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    double pair = rho(k) + rho(k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

// Kolmogorov-Smirnov distance between the empirical CDF of xs and
// Uniform(lo, hi).
inline double ks_distance_uniform(std::span<const double> xs, double lo, double hi) {
  if (xs.empty()) throw std::invalid_argument("ks_distance_uniform: empty sample");
  if (!(hi > lo)) throw std::invalid_argument("ks_distance_uniform: hi must exceed lo");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = std::clamp((sorted[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

}  // namespace seasonsim::stats
