#pragma once

// Synthetic data generators: a 30-team league, model-consistent game logs,
// and the log-uniform-ratio dataset used for posterior-recovery checks.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "seasonsim/batting_walk.hpp"
#include "seasonsim/era_kalman.hpp"
#include "seasonsim/ingest.hpp"
#include "seasonsim/league.hpp"
#include "seasonsim/model.hpp"
#include "seasonsim/random.hpp"

namespace seasonsim::synthetic {

// Two leagues of three five-team divisions, 162-game season.
inline LeagueStructure standard_league() {
  LeagueStructure ls;
  ls.leagues = {
      {"AL",
       {{"East", {"BAL", "BOS", "NYY", "TBR", "TOR"}},
        {"Central", {"CHW", "CLE", "DET", "KCR", "MIN"}},
        {"West", {"ATH", "HOU", "LAA", "SEA", "TEX"}}}},
      {"NL",
       {{"East", {"ATL", "MIA", "NYM", "PHI", "WSN"}},
        {"Central", {"CHC", "CIN", "MIL", "PIT", "STL"}},
        {"West", {"ARI", "COL", "LAD", "SDP", "SFG"}}}},
  };
  ls.season_length = 162;
  ls.wildcards_per_league = 3;
  return ls;
}

// Games whose three ratios are independently log-uniform on
// [1/spread, spread], with outcomes drawn from the marginal model at `truth`.
inline std::vector<GameRecord> recovery_dataset(std::size_t n_games, const Exponents& truth, Rng& rng,
                                                double spread = 1.25) {
  std::vector<GameRecord> out;
  out.reserve(n_games);
  const double lo = std::log(1.0 / spread);
  const double hi = std::log(spread);
  const Date day{std::chrono::year{2024}, std::chrono::June, std::chrono::day{1}};
  for (std::size_t i = 0; i < n_games; ++i) {
    const double alpha = std::exp(lo + (hi - lo) * uniform01(rng));
    const double beta = std::exp(lo + (hi - lo) * uniform01(rng));
    const double gamma = std::exp(lo + (hi - lo) * uniform01(rng));
    GameRecord g;
    g.date = day;
    g.home_team = "HOM";
    g.away_team = "AWY";
    g.away = {0.4, 0.25, 4.0};
    g.home = {0.4 * alpha, 0.25 * beta, 4.0 / gamma};
    g.home_games_played = g.away_games_played = 100;
    const double lambda = compute_lambda({alpha, beta, gamma}, {truth[0], truth[1], truth[2], 1.0});
    g.home_won = draw_outcome(marginal_home_win_prob(lambda), rng);
    out.push_back(std::move(g));
  }
  return out;
}

struct SeasonGenerator {
  Exponents truth{1.5, 0.8, 0.6};
  WalkConfig walk{0.0015, 0.250, 0.150, 0.400};
  double batting_spread = 0.012;  // sd of team starting deviations
  double era_level_mean = 4.2;
  double era_level_sd = 0.5;
  NoiseParams era_noise{0.5, 0.05};
};

struct SyntheticSeason {
  std::vector<RawGameRow> played;  // with explicit pregame win percentages
  Schedule remaining;              // unplayed games, in round order
};

// Simulates a season on a balanced synthetic schedule and plays the first
// `rounds_played` daily rounds (every team plays once per round).
inline SyntheticSeason synthesize_season(const LeagueStructure& league, int year, const SeasonGenerator& gen,
                                         Rng& rng, int rounds_played = -1) {
  const Date opening{std::chrono::year{year}, std::chrono::March, std::chrono::day{28}};
  const Schedule full = generate_schedule(league, {}, opening, rng);
  const LeagueIndex idx{league};
  const std::size_t n = idx.size();

  std::vector<double> deviation(n), era_level(n);
  std::vector<int> wins(n, 0), losses(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    deviation[i] = normal(rng, 0.0, gen.batting_spread);
    era_level[i] = std::max(2.0, normal(rng, gen.era_level_mean, gen.era_level_sd));
  }

  const std::size_t games_per_round = n / 2;
  const std::size_t cut = rounds_played < 0 ? full.games.size()
                                            : std::min(full.games.size(), games_per_round * static_cast<std::size_t>(rounds_played));
  SyntheticSeason out;
  out.remaining.synthetic = true;
  for (std::size_t k = 0; k < full.games.size(); ++k) {
    const auto& sg = full.games[k];
    if (k >= cut) {
      out.remaining.games.push_back(sg);
      continue;
    }
    const std::size_t h = idx.at(sg.home), a = idx.at(sg.away);
    auto pct = [&](std::size_t t) {
      const int g = wins[t] + losses[t];
      return g == 0 ? 0.5 : static_cast<double>(wins[t]) / g;
    };
    RawGameRow r;
    r.line = out.played.size() + 2;
    r.date = sg.date;
    r.home = sg.home;
    r.away = sg.away;
    r.home_winpct = pct(h);
    r.away_winpct = pct(a);
    r.home_avg = gen.walk.implied_average(deviation[h]);
    r.away_avg = gen.walk.implied_average(deviation[a]);
    r.home_era = std::max(kEraFloor, era_level[h] + normal(rng, 0.0, gen.era_noise.sigma_obs));
    r.away_era = std::max(kEraFloor, era_level[a] + normal(rng, 0.0, gen.era_noise.sigma_obs));
    const TeamPregame hp{*r.home_winpct, r.home_avg, r.home_era};
    const TeamPregame ap{*r.away_winpct, r.away_avg, r.away_era};
    const double lambda =
        compute_lambda(ratios_from_records(hp, ap), {gen.truth[0], gen.truth[1], gen.truth[2], 1.0});
    const bool home_won = draw_outcome(marginal_home_win_prob(lambda), rng);
    r.home_won = home_won;
    out.played.push_back(r);

    (home_won ? wins[h] : losses[h]) += 1;
    (home_won ? losses[a] : wins[a]) += 1;
    for (std::size_t t : {h, a}) {
      deviation[t] = walk_step(deviation[t], gen.walk, rng);
      era_level[t] = std::max(kEraFloor, era_level[t] + normal(rng, 0.0, gen.era_noise.sigma_process));
    }
  }
  return out;
}

}  // namespace seasonsim::synthetic
