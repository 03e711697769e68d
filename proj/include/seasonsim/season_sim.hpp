#pragma once

// Replicated season simulation.
//
// Each replication walks the remaining schedule in date order. Every game
// forms strength ratios from the two teams' current state, evaluates the
// outcome model with one posterior draw (or the posterior mean), samples the
// result, and then advances both teams' batting and ERA processes by a step.
// Final standings decide playoff qualification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seasonsim/batting_walk.hpp"
#include "seasonsim/csv.hpp"
#include "seasonsim/era_kalman.hpp"
#include "seasonsim/league.hpp"
#include "seasonsim/mcmc.hpp"
#include "seasonsim/model.hpp"
#include "seasonsim/parallel.hpp"
#include "seasonsim/random.hpp"
#include "seasonsim/stats.hpp"

namespace seasonsim {

enum class ProbabilityMode { marginal, two_stage };
enum class DrawMode { posterior_predictive, point };
enum class EraInputMode { forecast_mean, path };

inline std::optional<ProbabilityMode> parse_probability_mode(std::string_view s) {
  if (s == "marginal") return ProbabilityMode::marginal;
  if (s == "two-stage") return ProbabilityMode::two_stage;
  return std::nullopt;
}
inline std::string_view to_string(ProbabilityMode m) {
  return m == ProbabilityMode::marginal ? "marginal" : "two-stage";
}
inline std::optional<DrawMode> parse_draw_mode(std::string_view s) {
  if (s == "posterior-predictive") return DrawMode::posterior_predictive;
  if (s == "point") return DrawMode::point;
  return std::nullopt;
}
inline std::string_view to_string(DrawMode m) {
  return m == DrawMode::posterior_predictive ? "posterior-predictive" : "point";
}
inline std::optional<EraInputMode> parse_era_mode(std::string_view s) {
  if (s == "forecast-mean") return EraInputMode::forecast_mean;
  if (s == "path") return EraInputMode::path;
  return std::nullopt;
}
inline std::string_view to_string(EraInputMode m) {
  return m == EraInputMode::forecast_mean ? "forecast-mean" : "path";
}

struct SimConfig {
  double m = 1.0;
  ProbabilityMode probability = ProbabilityMode::marginal;
  DrawMode draws = DrawMode::posterior_predictive;
  EraInputMode era_input = EraInputMode::forecast_mean;
  WalkConfig walk;
  int burn_in_games = 20;
};

struct TeamSimState {
  std::string team;
  int wins = 0;
  int losses = 0;
  double batting_deviation = 0.0;
  KalmanState era_state{4.0, 0.0};
  NoiseParams noise;
  Tercile tercile = Tercile::medium;

  int games() const noexcept { return wins + losses; }
  double win_pct() const {
    if (games() == 0) throw std::domain_error("win_pct: team " + team + " has no games of record");
    return static_cast<double>(wins) / static_cast<double>(games());
  }
};

// Posterior draws with their mean cached for point mode.
class PosteriorSample {
 public:
  PosteriorSample() = default;
  explicit PosteriorSample(std::vector<Exponents> draws) : draws_(std::move(draws)) {
    if (draws_.empty()) throw std::invalid_argument("PosteriorSample: no draws");
    for (const auto& d : draws_)
      for (std::size_t p = 0; p < 3; ++p) mean_[p] += d[p];
    for (auto& v : mean_) v /= static_cast<double>(draws_.size());
  }
  static PosteriorSample point(const Exponents& r) { return PosteriorSample{std::vector<Exponents>{r}}; }

  const std::vector<Exponents>& draws() const { return draws_; }
  const Exponents& mean() const { return mean_; }
  bool empty() const { return draws_.empty(); }

 private:
  std::vector<Exponents> draws_;
  Exponents mean_{};
};

namespace detail {

inline double era_input(const TeamSimState& s, const SimConfig& cfg, Rng& rng) {
  double era = s.era_state.mean;
  if (cfg.era_input == EraInputMode::path) era += normal(rng, 0.0, s.noise.sigma_obs);
  return std::max(era, kEraFloor);
}

}  // namespace detail

inline StrengthRatios matchup_ratios(const TeamSimState& home, const TeamSimState& away,
                                     double home_era, double away_era, const WalkConfig& walk) {
  const TeamPregame h{home.win_pct(), walk.implied_average(home.batting_deviation), home_era};
  const TeamPregame a{away.win_pct(), walk.implied_average(away.batting_deviation), away_era};
  return ratios_from_records(h, a);
}

// Home-win flag for one simulated game.
inline bool simulate_game(const TeamSimState& home, const TeamSimState& away,
                          const PosteriorSample& posterior, const SimConfig& cfg, Rng& rng) {
  if (home.games() == 0 || away.games() == 0)
    throw std::domain_error("simulate_game: both teams need at least one game of record");
  if (posterior.empty()) throw std::invalid_argument("simulate_game: no posterior draws");
  const Exponents& r = cfg.draws == DrawMode::point
                           ? posterior.mean()
                           : posterior.draws()[uniform_index(rng, posterior.draws().size())];
  const double home_era = detail::era_input(home, cfg, rng);
  const double away_era = detail::era_input(away, cfg, rng);
  const auto ratios = matchup_ratios(home, away, home_era, away_era, cfg.walk);
  const double lambda = compute_lambda(ratios, {r[0], r[1], r[2], cfg.m});
  const double p = cfg.probability == ProbabilityMode::two_stage ? draw_latent_prob(lambda, cfg.m, rng)
                                                                  : marginal_home_win_prob(lambda);
  return draw_outcome(p, rng);
}

inline TeamSimState update_after_game(TeamSimState state, bool won, const SimConfig& cfg, Rng& rng) {
  if (won)
    ++state.wins;
  else
    ++state.losses;
  state.batting_deviation = walk_step(state.batting_deviation, cfg.walk, rng);
  state.era_state.variance += state.noise.sigma_process * state.noise.sigma_process;
  if (cfg.era_input == EraInputMode::path)
    state.era_state.mean += normal(rng, 0.0, state.noise.sigma_process);
  return state;
}

struct SeasonResult {
  std::uint64_t replication_id = 0;
  std::uint64_t seed = 0;
  std::vector<int> wins;        // indexed like LeagueStructure::teams()
  std::vector<char> qualified;  // same indexing

  int total_wins() const {
    int s = 0;
    for (int w : wins) s += w;
    return s;
  }
};

// Division winners plus the best remaining records per league. Equal
// records are ordered by a seeded uniform draw.
inline std::vector<char> playoff_qualifiers(const std::vector<int>& wins, const LeagueStructure& league,
                                            Rng& rng) {
  league.validate();
  const LeagueIndex idx{league};
  if (wins.size() != idx.size())
    throw std::invalid_argument("playoff_qualifiers: standings size does not match league");
  std::vector<std::uint64_t> tiebreak(idx.size());
  for (auto& k : tiebreak) k = rng();
  auto better = [&](std::size_t a, std::size_t b) {
    if (wins[a] != wins[b]) return wins[a] > wins[b];
    if (tiebreak[a] != tiebreak[b]) return tiebreak[a] < tiebreak[b];
    return a < b;
  };
  std::vector<char> q(idx.size(), 0);
  for (const auto& l : league.leagues) {
    std::vector<std::size_t> rest;
    for (const auto& d : l.divisions) {
      std::vector<std::size_t> members;
      for (const auto& t : d.teams) members.push_back(idx.at(t));
      std::sort(members.begin(), members.end(), better);
      q[members.front()] = 1;
      rest.insert(rest.end(), members.begin() + 1, members.end());
    }
    std::sort(rest.begin(), rest.end(), better);
    const auto wc = std::min<std::size_t>(rest.size(), static_cast<std::size_t>(league.wildcards_per_league));
    for (std::size_t i = 0; i < wc; ++i) q[rest[i]] = 1;
  }
  return q;
}

struct SeasonInputs {
  LeagueStructure league;
  std::vector<TeamSimState> teams;  // initial states, any order
  Schedule schedule;
  PosteriorSample posterior;
  std::optional<NoisePools> noise_pools;  // when set, noise is drawn per team per replication
  SimConfig cfg;
};

// Problems that would make a replication ill-defined.
inline std::vector<std::string> season_input_issues(const SeasonInputs& in) {
  std::vector<std::string> out = in.league.issues();
  if (!out.empty()) return out;
  const LeagueIndex idx{in.league};
  std::vector<int> seen(idx.size(), 0);
  std::vector<int> scheduled(idx.size(), 0);
  for (const auto& s : in.teams) {
    const auto i = idx.find(s.team);
    if (!i) {
      out.push_back("initial state for team " + s.team + " not in league structure");
      continue;
    }
    if (seen[*i]++) out.push_back("duplicate initial state for team " + s.team);
    if (s.wins < 0 || s.losses < 0) out.push_back("negative record for team " + s.team);
    if (s.games() < in.cfg.burn_in_games)
      out.push_back("team " + s.team + " has " + std::to_string(s.games()) + " games of record, fewer than burn-in " +
                    std::to_string(in.cfg.burn_in_games));
  }
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (!seen[i]) out.push_back("no initial state for team " + idx.names()[i]);
  for (const auto& g : in.schedule.games) {
    const auto h = idx.find(g.home), a = idx.find(g.away);
    if (!h) out.push_back("scheduled team " + g.home + " not in league structure");
    if (!a) out.push_back("scheduled team " + g.away + " not in league structure");
    if (h) ++scheduled[*h];
    if (a) ++scheduled[*a];
  }
  if (out.empty()) {
    for (const auto& s : in.teams) {
      const auto i = idx.at(s.team);
      if (s.games() + scheduled[i] > in.league.season_length)
        out.push_back("team " + s.team + " would play " + std::to_string(s.games() + scheduled[i]) +
                      " games, more than the season length");
    }
  }
  return out;
}

inline SeasonResult run_replication(const SeasonInputs& in, std::uint64_t seed, std::uint64_t replication_id = 0) {
  if (const auto issues = season_input_issues(in); !issues.empty())
    throw std::invalid_argument("run_replication: " + issues.front());
  if (in.posterior.empty()) throw std::invalid_argument("run_replication: no posterior draws");
  in.cfg.walk.validate();

  const LeagueIndex idx{in.league};
  std::vector<TeamSimState> state(idx.size());
  for (const auto& s : in.teams) state[idx.at(s.team)] = s;

  Rng rng{seed};
  if (in.noise_pools)
    for (auto& s : state) s.noise = in.noise_pools->sample(s.tercile, rng);

  std::vector<std::size_t> order(in.schedule.games.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return in.schedule.games[a].date < in.schedule.games[b].date;
  });

  for (std::size_t gi : order) {
    const auto& g = in.schedule.games[gi];
    const std::size_t h = idx.at(g.home);
    const std::size_t a = idx.at(g.away);
    const bool home_won = simulate_game(state[h], state[a], in.posterior, in.cfg, rng);
    state[h] = update_after_game(std::move(state[h]), home_won, in.cfg, rng);
    state[a] = update_after_game(std::move(state[a]), !home_won, in.cfg, rng);
  }

  SeasonResult result;
  result.replication_id = replication_id;
  result.seed = seed;
  result.wins.reserve(state.size());
  for (const auto& s : state) result.wins.push_back(s.wins);
  result.qualified = playoff_qualifiers(result.wins, in.league, rng);
  return result;
}

inline std::vector<SeasonResult> run_replications(std::size_t n, const SeasonInputs& in, std::uint64_t base_seed,
                                                  std::size_t threads = 1) {
  if (n == 0) throw std::invalid_argument("run_replications: n must be at least 1");
  if (const auto issues = season_input_issues(in); !issues.empty())
    throw std::invalid_argument("run_replications: " + issues.front());
  std::vector<SeasonResult> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = run_replication(in, derive_seed(base_seed, i), i); });
  return out;
}

struct TeamForecast {
  std::string team;
  double mean_wins = 0.0;
  double ci5 = 0.0;
  double ci95 = 0.0;
  double playoff_prob = 0.0;  // in [0, 1]
};

struct ForecastSummary {
  std::vector<TeamForecast> teams;  // descending mean wins
  std::size_t replications = 0;
};

inline ForecastSummary summarize(const std::vector<SeasonResult>& results, const std::vector<std::string>& teams) {
  if (results.empty()) throw std::invalid_argument("summarize: no results");
  ForecastSummary s;
  s.replications = results.size();
  for (std::size_t t = 0; t < teams.size(); ++t) {
    std::vector<double> wins;
    wins.reserve(results.size());
    std::size_t made = 0;
    for (const auto& r : results) {
      if (r.wins.size() != teams.size()) throw std::invalid_argument("summarize: result size mismatch");
      wins.push_back(static_cast<double>(r.wins[t]));
      made += r.qualified[t] ? 1 : 0;
    }
    TeamForecast f;
    f.team = teams[t];
    f.mean_wins = stats::mean(wins);
    f.ci5 = stats::quantile_nearest_rank(wins, 0.05);
    f.ci95 = stats::quantile_nearest_rank(wins, 0.95);
    f.playoff_prob = static_cast<double>(made) / static_cast<double>(results.size());
    s.teams.push_back(std::move(f));
  }
  std::stable_sort(s.teams.begin(), s.teams.end(), [](const TeamForecast& a, const TeamForecast& b) {
    if (a.mean_wins != b.mean_wins) return a.mean_wins > b.mean_wins;
    return a.team < b.team;
  });
  return s;
}

// (win_total, count) rows from the smallest to the largest observed total.
inline std::vector<std::pair<int, std::size_t>> export_win_histogram(const std::vector<SeasonResult>& results,
                                                                     const std::vector<std::string>& teams,
                                                                     const std::string& team) {
  const auto it = std::find(teams.begin(), teams.end(), team);
  if (it == teams.end()) throw std::invalid_argument("export_win_histogram: unknown team " + team);
  if (results.empty()) throw std::invalid_argument("export_win_histogram: no results");
  const auto t = static_cast<std::size_t>(it - teams.begin());
  std::map<int, std::size_t> counts;
  for (const auto& r : results) ++counts[r.wins.at(t)];
  std::vector<std::pair<int, std::size_t>> out;
  for (int w = counts.begin()->first; w <= counts.rbegin()->first; ++w) {
    auto c = counts.find(w);
    out.emplace_back(w, c == counts.end() ? 0 : c->second);
  }
  return out;
}

inline void write_summary_csv(std::ostream& os, const ForecastSummary& s) {
  os << "Team,MeanWins,CI5,CI95,PlayoffPct\n";
  for (const auto& t : s.teams)
    os << t.team << ',' << csv::format_fixed(t.mean_wins, 3) << ',' << csv::format_fixed(t.ci5, 1) << ','
       << csv::format_fixed(t.ci95, 1) << ',' << csv::format_fixed(100.0 * t.playoff_prob, 1) << '\n';
}

// Aligned, human-readable table in the layout of a season-projection report.
inline void write_summary_table(std::ostream& os, const ForecastSummary& s) {
  char line[128];
  std::snprintf(line, sizeof line, "%-6s %10s %18s %10s\n", "Team", "Mean Wins", "90% CI (5, 95)", "Playoff %");
  os << line;
  for (const auto& t : s.teams) {
    const std::string ci = "(" + csv::format_fixed(t.ci5, 1) + ", " + csv::format_fixed(t.ci95, 1) + ")";
    std::snprintf(line, sizeof line, "%-6s %10.1f %18s %10.1f\n", t.team.c_str(), t.mean_wins, ci.c_str(),
                  100.0 * t.playoff_prob);
    os << line;
  }
}

inline void write_replications_csv(std::ostream& os, const std::vector<SeasonResult>& results,
                                   const std::vector<std::string>& teams) {
  os << "replication,team,wins,qualified\n";
  for (const auto& r : results)
    for (std::size_t t = 0; t < teams.size(); ++t)
      os << r.replication_id << ',' << teams[t] << ',' << r.wins[t] << ',' << (r.qualified[t] ? 1 : 0) << '\n';
}

inline void write_histogram_csv(std::ostream& os, const std::vector<std::pair<int, std::size_t>>& hist) {
  os << "win_total,count\n";
  for (const auto& [w, c] : hist) os << w << ',' << c << '\n';
}

}  // namespace seasonsim
