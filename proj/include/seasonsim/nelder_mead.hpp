#pragma once

// Box-constrained Nelder-Mead minimiser for small, cheap objectives.
// Vertices are projected onto the box after every move.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace seasonsim::optim {

template <std::size_t N>
struct MinimizeResult {
  std::array<double, N> x{};
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

template <std::size_t N>
struct NelderMeadOptions {
  std::array<double, N> lower{};
  std::array<double, N> upper{};
  double initial_step = 0.5;
  double f_tol = 1e-10;
  double x_tol = 1e-7;
  std::size_t max_iterations = 4000;
};

template <std::size_t N, typename F>
MinimizeResult<N> nelder_mead(F&& f, std::array<double, N> start, const NelderMeadOptions<N>& opt) {
  using Point = std::array<double, N>;
  auto project = [&](Point p) {
    for (std::size_t i = 0; i < N; ++i) p[i] = std::clamp(p[i], opt.lower[i], opt.upper[i]);
    return p;
  };
  auto eval = [&](const Point& p) {
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::array<Point, N + 1> simplex;
  std::array<double, N + 1> values;
  simplex[0] = project(start);
  for (std::size_t i = 0; i < N; ++i) {
    Point p = simplex[0];
    const double room_up = opt.upper[i] - p[i];
    p[i] += room_up >= opt.initial_step ? opt.initial_step : -opt.initial_step;
    simplex[i + 1] = project(p);
  }
  for (std::size_t i = 0; i <= N; ++i) values[i] = eval(simplex[i]);

  std::array<std::size_t, N + 1> order;
  MinimizeResult<N> result;
  for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[N - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= N; ++i)
      for (std::size_t k = 0; k < N; ++k)
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
    const double spread = values[worst] - values[best];
    result.iterations = iter;
    if (std::isfinite(spread) && spread <= opt.f_tol * (1.0 + std::abs(values[best])) &&
        diameter <= opt.x_tol) {
      result.converged = true;
      break;
    }

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < N; ++k) centroid[k] += simplex[i][k] / static_cast<double>(N);
    }
    auto along = [&](double t) {
      Point p;
      for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
      return project(p);
    };

    const Point reflected = along(-1.0);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const Point expanded = along(-2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Point contracted = along(outside ? -0.5 : 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < N; ++k)
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      simplex[i] = project(simplex[i]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best_idx = static_cast<std::size_t>(best_it - values.begin());
  result.x = simplex[best_idx];
  result.value = *best_it;
  return result;
}

}  // namespace seasonsim::optim
