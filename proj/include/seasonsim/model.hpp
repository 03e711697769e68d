#pragma once

// Two-stage game-outcome model.
//
//   lambda = alpha^r1 * beta^r2 * gamma^r3
//   p      ~ Beta(m * lambda, m)
//   X      ~ Bernoulli(p)
//
// alpha, beta and gamma are home-over-away ratios of win percentage, batting
// average and (inverted) starter ERA, so a ratio above 1 always favours the
// home side. Integrating p out gives P(X = 1) = lambda / (1 + lambda) for
// every m, which is the likelihood the sampler works with.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seasonsim/date.hpp"
#include "seasonsim/random.hpp"

namespace seasonsim {

// Covariates are floored here before any ratio is formed.
inline constexpr double kCovariateFloor = 1e-3;

struct StrengthRatios {
  double alpha = 1.0;  // home / away win percentage
  double beta = 1.0;   // home / away batting average
  double gamma = 1.0;  // away / home starter ERA

  bool valid() const noexcept {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    return ok(alpha) && ok(beta) && ok(gamma);
  }
};

// (r1, r2, r3)
using Exponents = std::array<double, 3>;

struct ModelParams {
  double r1 = 1.0;
  double r2 = 1.0;
  double r3 = 1.0;
  double m = 1.0;  // Beta concentration; not identifiable from outcomes

  std::array<double, 3> exponents() const noexcept { return {r1, r2, r3}; }

  bool valid() const noexcept {
    auto ok = [](double r) { return std::isfinite(r) && r >= 0.0; };
    return ok(r1) && ok(r2) && ok(r3) && std::isfinite(m) && m > 0.0;
  }
};

struct GamePrediction {
  double lambda = 1.0;
  double p = 0.5;
  std::optional<bool> outcome;
};

// Pregame covariates of one side of a matchup.
struct TeamPregame {
  double winpct = 0.5;
  double avg = 0.25;
  double era = 4.0;
};

struct GameRecord {
  Date date{};
  std::string home_team;
  std::string away_team;
  TeamPregame home;
  TeamPregame away;
  bool home_won = false;
  // Games each side had played earlier in the same season.
  int home_games_played = 0;
  int away_games_played = 0;
  // Set when a side had no prior games and its win percentage defaulted to 0.5.
  bool winpct_defaulted = false;
};

inline StrengthRatios ratios_from_records(const TeamPregame& home, const TeamPregame& away) {
  for (double v : {home.winpct, home.avg, home.era, away.winpct, away.avg, away.era}) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::domain_error("ratios_from_records: covariates must be finite and nonnegative");
  }
  auto fl = [](double v) { return std::max(v, kCovariateFloor); };
  return {fl(home.winpct) / fl(away.winpct), fl(home.avg) / fl(away.avg),
          fl(away.era) / fl(home.era)};
}

inline StrengthRatios ratios_from_records(const GameRecord& g) {
  return ratios_from_records(g.home, g.away);
}

inline double compute_lambda(const StrengthRatios& ratios, const ModelParams& params) {
  if (!ratios.valid()) throw std::domain_error("compute_lambda: ratios must be positive and finite");
  if (!params.valid()) throw std::domain_error("compute_lambda: invalid model parameters");
  const double lambda = std::pow(ratios.alpha, params.r1) * std::pow(ratios.beta, params.r2) *
                        std::pow(ratios.gamma, params.r3);
  if (!std::isfinite(lambda) || !(lambda > 0.0))
    throw std::domain_error("compute_lambda: non-finite relative strength");
  return lambda;
}

inline double marginal_home_win_prob(double lambda) {
  if (!std::isfinite(lambda) || !(lambda > 0.0))
    throw std::domain_error("marginal_home_win_prob: lambda must be positive and finite");
  return lambda / (1.0 + lambda);
}

inline double draw_latent_prob(double lambda, double m, Rng& rng) {
  if (!std::isfinite(lambda) || !(lambda > 0.0))
    throw std::domain_error("draw_latent_prob: lambda must be positive");
  if (!std::isfinite(m) || !(m > 0.0))
    throw std::domain_error("draw_latent_prob: concentration m must be positive");
  return beta_draw(rng, m * lambda, m);
}

// Latent p given the observed outcome: Beta(m*lambda + X, m + 1 - X).
inline double draw_latent_prob_posterior(double lambda, double m, bool home_won, Rng& rng) {
  if (!std::isfinite(lambda) || !(lambda > 0.0) || !std::isfinite(m) || !(m > 0.0))
    throw std::domain_error("draw_latent_prob_posterior: lambda and m must be positive");
  const double x = home_won ? 1.0 : 0.0;
  return beta_draw(rng, m * lambda + x, m + 1.0 - x);
}

inline bool draw_outcome(double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("draw_outcome: p outside [0, 1]");
  if (p == 1.0) return true;
  if (p == 0.0) return false;
  return uniform01(rng) < p;
}

namespace detail {

// log(1 + exp(x)) without overflow.
inline double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Log-likelihood contribution of one game given eta = log(lambda).
inline double outcome_log_prob(double eta, bool home_won) noexcept {
  // ln(lambda/(1+lambda)) = -softplus(-eta); ln(1/(1+lambda)) = -softplus(eta)
  return home_won ? -softplus(-eta) : -softplus(eta);
}

}  // namespace detail

// Per-game log ratios, precomputed once so repeated likelihood evaluation
// is a dot product plus a softplus per game.
class LogRatioTable {
 public:
  LogRatioTable() = default;

  explicit LogRatioTable(const std::vector<GameRecord>& games) {
    rows_.reserve(games.size());
    outcomes_.reserve(games.size());
    for (const auto& g : games) {
      const auto r = ratios_from_records(g);
      rows_.push_back({std::log(r.alpha), std::log(r.beta), std::log(r.gamma)});
      outcomes_.push_back(g.home_won);
    }
  }

  void add(const StrengthRatios& r, bool home_won) {
    if (!r.valid()) throw std::domain_error("LogRatioTable: invalid ratios");
    rows_.push_back({std::log(r.alpha), std::log(r.beta), std::log(r.gamma)});
    outcomes_.push_back(home_won);
  }

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::array<double, 3>& log_ratios(std::size_t i) const { return rows_[i]; }
  bool home_won(std::size_t i) const { return outcomes_[i] != 0; }

  double log_likelihood(const std::array<double, 3>& r) const {
    double total = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& x = rows_[i];
      const double eta = r[0] * x[0] + r[1] * x[1] + r[2] * x[2];
      total += detail::outcome_log_prob(eta, outcomes_[i] != 0);
    }
    return total;
  }

 private:
  std::vector<std::array<double, 3>> rows_;
  std::vector<char> outcomes_;
};

// Sum over games of ln P(X_s | lambda_s) under the marginal Bernoulli.
inline double log_likelihood(const ModelParams& params, const std::vector<GameRecord>& games) {
  if (!params.valid()) throw std::domain_error("log_likelihood: invalid model parameters");
  double total = 0.0;
  for (std::size_t i = 0; i < games.size(); ++i) {
    const auto r = ratios_from_records(games[i]);
    const double eta = params.r1 * std::log(r.alpha) + params.r2 * std::log(r.beta) +
                       params.r3 * std::log(r.gamma);
    const double term = detail::outcome_log_prob(eta, games[i].home_won);
    if (!std::isfinite(term))
      throw std::domain_error("log_likelihood: non-finite term at record " + std::to_string(i) +
                              " (" + games[i].home_team + " vs " + games[i].away_team + ")");
    total += term;
  }
  return total;
}

inline GamePrediction predict_game(const StrengthRatios& ratios, const ModelParams& params) {
  const double lambda = compute_lambda(ratios, params);
  return {lambda, marginal_home_win_prob(lambda), std::nullopt};
}

}  // namespace seasonsim
