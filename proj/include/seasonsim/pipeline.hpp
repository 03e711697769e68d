#pragma once

// Glue between ingested game logs and the estimation / simulation stages,
// plus readers and writers for the intermediate artifacts (posterior draws,
// noise pools, tercile assignments, replication tables).

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seasonsim/csv.hpp"
#include "seasonsim/era_kalman.hpp"
#include "seasonsim/ingest.hpp"
#include "seasonsim/league.hpp"
#include "seasonsim/mcmc.hpp"
#include "seasonsim/parallel.hpp"
#include "seasonsim/season_sim.hpp"

namespace seasonsim {

namespace detail {

inline std::vector<std::string> read_header(std::istream& in, const std::string& expected, const std::string& source) {
  std::string line;
  while (std::getline(in, line))
    if (!csv::trim(line).empty()) break;
  if (csv::trim(line) != expected) throw std::runtime_error(source + ": expected header " + expected);
  return csv::split(line);
}

inline std::runtime_error row_error(const std::string& source, std::size_t line, const std::string& what) {
  return std::runtime_error(source + ": row " + std::to_string(line) + ": " + what);
}

}  // namespace detail

// ---- posterior draws -------------------------------------------------------

inline void write_draws_csv(std::ostream& os, const std::vector<PosteriorDraws>& chains) {
  os << "chain,iteration,r1,r2,r3\n";
  for (const auto& c : chains)
    for (std::size_t i = 0; i < c.draws.size(); ++i)
      os << c.chain_id << ',' << c.iterations[i] << ',' << csv::format_double(c.draws[i][0]) << ','
         << csv::format_double(c.draws[i][1]) << ',' << csv::format_double(c.draws[i][2]) << '\n';
}

inline std::vector<Exponents> parse_draws_csv(std::istream& in, const std::string& source = "draws file") {
  detail::read_header(in, "chain,iteration,r1,r2,r3", source);
  std::vector<Exponents> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 5) throw detail::row_error(source, lineno, "expected 5 fields");
    Exponents r{};
    for (std::size_t p = 0; p < 3; ++p) {
      const auto v = csv::parse_double(f[2 + p]);
      if (!v || *v < 0.0) throw detail::row_error(source, lineno, "invalid exponent '" + f[2 + p] + "'");
      r[p] = *v;
    }
    out.push_back(r);
  }
  if (out.empty()) throw std::runtime_error(source + ": no draws");
  return out;
}

// ---- noise pools -------------------------------------------------------

inline void write_noise_pool_csv(std::ostream& os, const std::vector<NoiseEstimate>& estimates) {
  os << "team,window_start,sigma_obs,sigma_process,converged\n";
  for (const auto& e : estimates)
    os << e.team << ',' << e.window_start << ',' << csv::format_double(e.params.sigma_obs) << ','
       << csv::format_double(e.params.sigma_process) << ',' << (e.converged ? 1 : 0) << '\n';
}

inline std::vector<NoiseEstimate> parse_noise_pool_csv(std::istream& in, const std::string& source = "noise pool") {
  detail::read_header(in, "team,window_start,sigma_obs,sigma_process,converged", source);
  std::vector<NoiseEstimate> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 5) throw detail::row_error(source, lineno, "expected 5 fields");
    NoiseEstimate e;
    e.team = f[0];
    const auto ws = csv::parse_int<std::size_t>(f[1]);
    const auto so = csv::parse_double(f[2]);
    const auto sp = csv::parse_double(f[3]);
    if (!ws || !so || !sp || *so < 0.0 || *sp < 0.0 || (f[4] != "0" && f[4] != "1"))
      throw detail::row_error(source, lineno, "malformed noise estimate");
    e.window_start = *ws;
    e.params = {*so, *sp};
    e.converged = f[4] == "1";
    out.push_back(std::move(e));
  }
  return out;
}

struct TercileAssignment {
  int season = 0;
  std::string team;
  Tercile tercile = Tercile::low;
  double early_era = 0.0;
};

inline void write_terciles_csv(std::ostream& os, const std::vector<TercileAssignment>& rows) {
  os << "season,team,tercile,early_era\n";
  for (const auto& r : rows)
    os << r.season << ',' << r.team << ',' << to_string(r.tercile) << ',' << csv::format_double(r.early_era) << '\n';
}

// ---- noise estimation over historical seasons --------------------------

struct NoiseRun {
  std::vector<TercileAssignment> terciles;
  std::array<std::vector<NoiseEstimate>, 3> pools;  // converged windows per tercile
  std::size_t windows = 0;
  std::size_t converged = 0;
  std::vector<std::string> warnings;

  NoisePools to_pools() const {
    NoisePools p;
    for (auto t : kTerciles)
      for (const auto& e : pools[static_cast<std::size_t>(t)]) p.add(t, e);
    return p;
  }
};

inline double early_mean(const std::vector<double>& series, std::size_t early_games) {
  const std::size_t k = std::min(series.size(), early_games);
  if (k == 0) throw std::invalid_argument("early_mean: empty series");
  return stats::mean(std::span<const double>(series.data(), k));
}

// Every (season, team) ERA series is grouped into terciles within its season
// by the mean of its first `early_games` values, then fitted window by window.
inline NoiseRun estimate_noise_pools(const std::vector<GameRecord>& records, std::size_t window_len,
                                     std::size_t early_games = 20, std::size_t threads = 1) {
  const auto series = team_era_series(records);
  NoiseRun run;
  std::map<int, std::map<std::string, double>> early_by_season;
  for (const auto& [key, s] : series) early_by_season[key.first][key.second] = early_mean(s, early_games);
  std::map<std::pair<int, std::string>, Tercile> tercile_of;
  for (const auto& [season, early] : early_by_season) {
    if (early.size() < 3) {
      run.warnings.push_back("season " + std::to_string(season) + " has fewer than 3 teams; skipped");
      continue;
    }
    const auto g = group_terciles(early);
    for (auto t : kTerciles)
      for (const auto& team : g.group(t)) {
        tercile_of[{season, team}] = t;
        run.terciles.push_back({season, team, t, early.at(team)});
      }
  }

  std::vector<std::pair<std::pair<int, std::string>, const std::vector<double>*>> jobs;
  for (const auto& [key, s] : series) {
    if (!tercile_of.count(key)) continue;
    if (s.size() < window_len) {
      run.warnings.push_back("team " + key.second + " season " + std::to_string(key.first) + ": series of " +
                             std::to_string(s.size()) + " games is shorter than window " + std::to_string(window_len));
      continue;
    }
    jobs.emplace_back(key, &s);
  }
  std::vector<std::vector<NoiseEstimate>> fits(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    fits[j] = sliding_noise_estimates(*jobs[j].second, window_len, jobs[j].first.second);
  });
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto t = tercile_of.at(jobs[j].first);
    for (auto& e : fits[j]) {
      ++run.windows;
      if (!e.converged || e.degenerate) continue;
      ++run.converged;
      run.pools[static_cast<std::size_t>(t)].push_back(std::move(e));
    }
  }
  if (jobs.empty()) throw std::runtime_error("noise estimation: no team has an ERA series of at least " +
                                             std::to_string(window_len) + " games");
  return run;
}

// ---- initial simulation state from the current season's games ----------

struct PreparedSeason {
  std::vector<TeamSimState> teams;
  TercileGrouping terciles;
  double league_mean_avg = 0.25;
};

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Records, batting deviations, filtered ERA levels and terciles for every
// league team. The ERA filter runs with the median pooled noise of the
// team's tercile, or `fallback_noise` when no pool is available.
inline PreparedSeason prepare_season(const std::vector<GameRecord>& season_records, const LeagueStructure& league,
                                     const NoisePools* pools, const NoiseParams& fallback_noise,
                                     std::size_t early_games = 20) {
  const LeagueIndex idx{league};
  const std::size_t n = idx.size();
  std::vector<int> wins(n, 0), losses(n, 0);
  std::vector<double> last_avg(n, -1.0);
  std::vector<std::vector<double>> era(n);
  for (const auto& g : season_records) {
    const auto h = idx.find(g.home_team), a = idx.find(g.away_team);
    if (!h || !a)
      throw std::invalid_argument("prepare_season: team " + (h ? g.away_team : g.home_team) +
                                  " is not in the league structure");
    (g.home_won ? wins[*h] : losses[*h]) += 1;
    (g.home_won ? losses[*a] : wins[*a]) += 1;
    last_avg[*h] = g.home.avg;
    last_avg[*a] = g.away.avg;
    era[*h].push_back(g.home.era);
    era[*a].push_back(g.away.era);
  }
  PreparedSeason out;
  std::map<std::string, double> early;
  double avg_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (era[i].empty()) throw std::invalid_argument("prepare_season: team " + idx.names()[i] + " has no games");
    early[idx.names()[i]] = early_mean(era[i], early_games);
    avg_sum += last_avg[i];
  }
  out.league_mean_avg = avg_sum / static_cast<double>(n);
  out.terciles = group_terciles(early);

  for (std::size_t i = 0; i < n; ++i) {
    TeamSimState s;
    s.team = idx.names()[i];
    s.wins = wins[i];
    s.losses = losses[i];
    s.batting_deviation = last_avg[i] - out.league_mean_avg;
    s.tercile = *out.terciles.find(s.team);
    s.noise = fallback_noise;
    if (pools && !pools->pool(s.tercile).empty()) {
      std::vector<double> so, sp;
      for (const auto& p : pools->pool(s.tercile)) {
        so.push_back(p.sigma_obs);
        sp.push_back(p.sigma_process);
      }
      s.noise = {median(so), median(sp)};
    }
    const auto& series = era[i];
    KalmanState init{series.front(), series.size() > 1 ? 10.0 * stats::variance(series) : 1.0};
    if (init.variance <= 0.0) init.variance = 1.0;
    NoiseParams filter_noise = s.noise;
    if (filter_noise.sigma_obs <= 0.0 && filter_noise.sigma_process <= 0.0) filter_noise.sigma_obs = 1e-4;
    s.era_state = filter_series(init, series, filter_noise).filtered.back();
    out.teams.push_back(std::move(s));
  }
  return out;
}

// ---- replication tables -------------------------------------------------

inline std::vector<SeasonResult> parse_replications_csv(std::istream& in, const std::vector<std::string>& teams,
                                                        const std::string& source = "replications file") {
  detail::read_header(in, "replication,team,wins,qualified", source);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < teams.size(); ++i) index[teams[i]] = i;
  std::map<std::uint64_t, SeasonResult> by_id;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw detail::row_error(source, lineno, "expected 4 fields");
    const auto id = csv::parse_int<std::uint64_t>(f[0]);
    const auto w = csv::parse_int<int>(f[2]);
    const auto it = index.find(f[1]);
    if (!id || !w || (f[3] != "0" && f[3] != "1")) throw detail::row_error(source, lineno, "malformed row");
    if (it == index.end()) throw detail::row_error(source, lineno, "unknown team '" + f[1] + "'");
    auto& r = by_id[*id];
    if (r.wins.empty()) {
      r.replication_id = *id;
      r.wins.assign(teams.size(), -1);
      r.qualified.assign(teams.size(), 0);
    }
    r.wins[it->second] = *w;
    r.qualified[it->second] = f[3] == "1" ? 1 : 0;
  }
  std::vector<SeasonResult> out;
  for (auto& [id, r] : by_id) {
    if (std::find(r.wins.begin(), r.wins.end(), -1) != r.wins.end())
      throw std::runtime_error(source + ": replication " + std::to_string(id) + " is missing teams");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace seasonsim
