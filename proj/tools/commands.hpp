#pragma once

// Subcommands of the seasonsim tool. Kept header-only so the tests can drive
// them in-process with captured streams.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seasonsim/seasonsim.hpp"

namespace seasonsim::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kUsageError = 2, kRuntimeError = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Settings = std::map<std::string, std::string>;

// Every recognised key with its default; empty means unset.
inline const Settings& default_settings() {
  static const Settings d{
      {"league", ""},
      {"history", ""},
      {"season", ""},
      {"schedule", ""},
      {"out", "out"},
      {"draws_file", ""},
      {"noise_dir", ""},
      {"seed", "20250520"},
      {"training_filter", "date-window"},
      {"r_max", "5"},
      {"m", "1"},
      {"proposal_std", "0.05"},
      {"iterations", "20000"},
      {"burn_in", "2000"},
      {"thin", "5"},
      {"chains", "4"},
      {"tune_rounds", "10"},
      {"replications", "1000"},
      {"burn_in_games", "20"},
      {"mode", "marginal"},
      {"draws", "posterior-predictive"},
      {"era_input", "forecast-mean"},
      {"walk_std", "0.0015"},
      {"window", "30"},
      {"early_games", "20"},
      {"threads", "0"},
      {"teams", ""},
      {"point_r", ""},
  };
  return d;
}

inline bool is_path_key(const std::string& k) {
  return k == "league" || k == "history" || k == "season" || k == "schedule" || k == "out" || k == "draws_file" ||
         k == "noise_dir";
}

// Flat `key = value` lines; `#` starts a comment. Relative paths are taken
// relative to the file's directory.
inline Settings read_config_file(const fs::path& path) {
  std::ifstream in{path};
  if (!in) throw UsageError("cannot open config file " + path.string());
  Settings out;
  std::string line;
  std::size_t lineno = 0;
  const fs::path base = path.parent_path();
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = csv::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos) throw UsageError(where + ": expected key = value");
    const std::string key{csv::trim(t.substr(0, eq))};
    std::string value{csv::trim(t.substr(eq + 1))};
    if (!default_settings().count(key)) throw UsageError(where + ": unknown key '" + key + "'");
    if (is_path_key(key) && !value.empty() && fs::path(value).is_relative()) value = (base / value).string();
    out[key] = value;
  }
  return out;
}

struct RunConfig {
  std::string league, history, season, schedule;
  fs::path out{"out"};
  fs::path draws_file;
  fs::path noise_dir;
  std::uint64_t seed = 20250520;
  std::string training_filter = "date-window";
  PriorConfig prior;
  ChainConfig chain;
  std::size_t chains = 4;
  std::size_t replications = 1000;
  SimConfig sim;
  std::size_t window = 30;
  std::size_t early_games = 20;
  std::size_t threads = 0;
  std::vector<std::string> teams;
  std::optional<Exponents> point_r;

  DatasetFilter filter() const {
    if (training_filter == "games-played") return DatasetFilter::games_played();
    if (training_filter == "none") return {1, 1, 12, 31, 0};
    return DatasetFilter::date_window();
  }
};

namespace detail {

template <typename T>
T number(const Settings& s, const std::string& key) {
  const auto& v = s.at(key);
  if constexpr (std::is_floating_point_v<T>) {
    const auto d = csv::parse_double(v);
    if (!d) throw UsageError("setting " + key + ": not a number: '" + v + "'");
    return *d;
  } else {
    const auto i = csv::parse_int<T>(v);
    if (!i) throw UsageError("setting " + key + ": not a nonnegative integer: '" + v + "'");
    return *i;
  }
}

inline std::vector<std::string> list(const std::string& v) {
  std::vector<std::string> out;
  if (csv::trim(v).empty()) return out;
  for (auto& f : csv::split(v)) out.emplace_back(csv::trim(f));
  return out;
}

}  // namespace detail

// Defaults, then config-file values, then command-line overrides.
inline RunConfig resolve_config(const Settings& file_values, const Settings& overrides) {
  Settings s = default_settings();
  for (const auto* src : {&file_values, &overrides})
    for (const auto& [k, v] : *src) {
      if (!s.count(k)) throw UsageError("unknown setting '" + k + "'");
      s[k] = v;
    }
  RunConfig c;
  c.league = s["league"];
  c.history = s["history"];
  c.season = s["season"];
  c.schedule = s["schedule"];
  c.out = s["out"];
  c.draws_file = s["draws_file"].empty() ? c.out / "posterior_draws.csv" : fs::path(s["draws_file"]);
  c.noise_dir = s["noise_dir"].empty() ? c.out : fs::path(s["noise_dir"]);
  c.seed = detail::number<std::uint64_t>(s, "seed");
  c.training_filter = s["training_filter"];
  if (c.training_filter != "date-window" && c.training_filter != "games-played" && c.training_filter != "none")
    throw UsageError("training_filter must be date-window, games-played or none");

  c.prior.r_max = detail::number<double>(s, "r_max");
  if (!(c.prior.r_max > 0.0)) throw UsageError("r_max must be positive");
  c.sim.m = detail::number<double>(s, "m");
  if (!(c.sim.m > 0.0)) throw UsageError("m must be positive");
  const double step = detail::number<double>(s, "proposal_std");
  c.chain.proposal_std = {step, step, step};
  c.chain.n_iterations = detail::number<std::size_t>(s, "iterations");
  c.chain.burn_in = detail::number<std::size_t>(s, "burn_in");
  c.chain.thin = detail::number<std::size_t>(s, "thin");
  c.chain.tune_rounds = detail::number<std::size_t>(s, "tune_rounds");
  c.chain.seed = c.seed;
  try {
    c.chain.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.chains = detail::number<std::size_t>(s, "chains");
  if (c.chains == 0) throw UsageError("chains must be at least 1");

  c.replications = detail::number<std::size_t>(s, "replications");
  if (c.replications == 0) throw UsageError("replications must be at least 1");
  c.sim.burn_in_games = detail::number<int>(s, "burn_in_games");
  const auto mode = parse_probability_mode(s["mode"]);
  if (!mode) throw UsageError("mode must be marginal or two-stage");
  c.sim.probability = *mode;
  const auto draws = parse_draw_mode(s["draws"]);
  if (!draws) throw UsageError("draws must be posterior-predictive or point");
  c.sim.draws = *draws;
  const auto era = parse_era_mode(s["era_input"]);
  if (!era) throw UsageError("era_input must be forecast-mean or path");
  c.sim.era_input = *era;
  c.sim.walk.step_std = detail::number<double>(s, "walk_std");
  if (!(c.sim.walk.step_std > 0.0)) throw UsageError("walk_std must be positive");

  c.window = detail::number<std::size_t>(s, "window");
  if (c.window < kMinNoiseWindow) throw UsageError("window must be at least " + std::to_string(kMinNoiseWindow));
  c.early_games = detail::number<std::size_t>(s, "early_games");
  if (c.early_games == 0) throw UsageError("early_games must be positive");
  c.threads = detail::number<std::size_t>(s, "threads");
  c.teams = detail::list(s["teams"]);
  if (const auto r = detail::list(s["point_r"]); !r.empty()) {
    if (r.size() != 3) throw UsageError("point_r needs three comma-separated exponents");
    Exponents e{};
    for (std::size_t p = 0; p < 3; ++p) {
      const auto v = csv::parse_double(r[p]);
      if (!v || *v < 0.0) throw UsageError("point_r: invalid exponent '" + r[p] + "'");
      e[p] = *v;
    }
    c.point_r = e;
  }
  return c;
}

// ---- file helpers -----------------------------------------------------------

inline std::ifstream open_input(const fs::path& path, const std::string& what) {
  std::ifstream in{path};
  if (!in) throw std::runtime_error("cannot read " + what + " " + path.string());
  return in;
}

// Writes every file or none: contents are rendered before anything touches
// the output directory.
inline void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  for (const auto& [name, text] : files) {
    std::ofstream os{dir / name, std::ios::binary};
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + (dir / name).string());
  }
}

inline void require_path(const std::string& value, const std::string& key, const std::string& command) {
  if (value.empty()) throw UsageError(command + ": no " + key + " given (set '" + key + "' or pass --" + key + ")");
  if (!fs::exists(value)) throw UsageError(command + ": " + key + " file not found: " + value);
}

inline LeagueStructure load_league(const std::string& path) {
  auto in = open_input(path, "league structure");
  auto ls = parse_league(in, path);
  ls.validate();
  return ls;
}

inline std::vector<RawGameRow> load_log(const std::string& path, const LeagueStructure* league) {
  std::set<std::string> known;
  if (league)
    for (const auto& t : league->teams()) known.insert(t);
  auto in = open_input(path, "game log");
  return parse_game_log(in, path, known);
}

inline std::string metadata(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

inline std::string to_text(auto&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

inline std::string noise_pool_name(Tercile t) { return "noise_pool_" + std::string(to_string(t)) + ".csv"; }

// ---- validate ---------------------------------------------------------------

inline int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream&) {
  std::vector<std::string> issues;
  std::optional<LeagueStructure> league;
  if (c.league.empty()) {
    issues.push_back("no league structure configured");
  } else {
    try {
      auto in = open_input(c.league, "league structure");
      league = parse_league(in, c.league);
      for (const auto& i : league->issues()) issues.push_back(c.league + ": " + i);
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }
  }
  const LeagueStructure* lp = league && league->issues().empty() ? &*league : nullptr;

  auto check_log = [&](const std::string& path) -> std::optional<std::vector<GameRecord>> {
    try {
      const auto rows = load_log(path, lp);
      return derive_pregame_records(rows);
    } catch (const std::exception& e) {
      issues.push_back(e.what());
      return std::nullopt;
    }
  };
  if (!c.history.empty()) check_log(c.history);

  std::map<std::string, int> played;
  bool have_season = false;
  if (!c.season.empty()) {
    if (const auto recs = check_log(c.season)) {
      have_season = true;
      for (const auto& g : *recs) {
        ++played[g.home_team];
        ++played[g.away_team];
      }
      if (lp)
        for (const auto& t : lp->teams())
          if (played[t] < c.sim.burn_in_games)
            issues.push_back(c.season + ": team " + t + " has " + std::to_string(played[t]) +
                             " games, fewer than burn-in " + std::to_string(c.sim.burn_in_games));
    }
  }

  if (!c.schedule.empty()) {
    try {
      auto in = open_input(c.schedule, "schedule");
      const auto sched = parse_schedule(in, c.schedule);
      if (lp) {
        const LeagueIndex idx{*lp};
        std::map<std::string, int> scheduled;
        for (std::size_t i = 0; i < sched.games.size(); ++i) {
          const auto& g = sched.games[i];
          for (const auto* team : {&g.home, &g.away}) {
            if (!idx.find(*team))
              issues.push_back(c.schedule + ": row " + std::to_string(i + 2) + ": team " + *team +
                               " not in league structure");
            ++scheduled[*team];
          }
        }
        if (have_season)
          for (const auto& t : lp->teams())
            if (played[t] + scheduled[t] != lp->season_length)
              issues.push_back("team " + t + ": " + std::to_string(played[t]) + " played + " +
                               std::to_string(scheduled[t]) + " scheduled != season length " +
                               std::to_string(lp->season_length));
      }
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }
  }

  for (const auto& i : issues) out << "issue: " << i << '\n';
  out << (issues.empty() ? "validation passed\n" : std::to_string(issues.size()) + " issue(s) found\n");
  return issues.empty() ? kOk : kValidationFailure;
}

// ---- fit --------------------------------------------------------------------

inline int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_path(c.history, "history", "fit");
  std::optional<LeagueStructure> league;
  if (!c.league.empty()) league = load_league(c.league);
  const auto rows = load_log(c.history, league ? &*league : nullptr);
  const auto records = filter_training_window(derive_pregame_records(rows), c.filter());
  if (records.empty())
    throw std::runtime_error("fit: no games left in " + c.history + " after the " + c.training_filter + " filter");

  const auto chains = run_chains(records, c.prior, c.chain, c.chains, c.threads);
  const auto rhat = c.chains > 1 ? split_rhat(chains) : Exponents{compute_rhat({chains[0].column(0)}),
                                                                   compute_rhat({chains[0].column(1)}),
                                                                   compute_rhat({chains[0].column(2)})};
  const auto ess = effective_sample_size(chains);
  const auto pooled = pool_draws(chains);
  const auto means = posterior_mean(chains);

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("posterior_draws.csv", to_text([&](std::ostream& os) { write_draws_csv(os, chains); }));
  for (const auto& ch : chains)
    files.emplace_back("trace_chain" + std::to_string(ch.chain_id) + ".csv",
                       to_text([&](std::ostream& os) { write_trace_csv(os, export_trace(ch)); }));

  std::ostringstream diag;
  diag << "parameter,mean,sd,q05,q95,split_rhat,ess\n";
  static constexpr const char* kNames[3] = {"r1", "r2", "r3"};
  std::array<ParamSummary, 3> summary{};
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<double> col;
    col.reserve(pooled.size());
    for (const auto& d : pooled) col.push_back(d[p]);
    summary[p] = summarize_column(col);
    diag << kNames[p] << ',' << csv::format_double(summary[p].mean) << ',' << csv::format_double(summary[p].sd) << ','
         << csv::format_double(summary[p].q05) << ',' << csv::format_double(summary[p].q95) << ','
         << csv::format_double(rhat[p]) << ',' << csv::format_double(ess[p]) << '\n';
  }
  files.emplace_back("diagnostics.csv", diag.str());

  std::ostringstream ch_csv;
  ch_csv << "chain,seed,acceptance_rate,start_r1,start_r2,start_r3,proposal_std_r1,proposal_std_r2,proposal_std_r3\n";
  for (const auto& ch : chains) {
    ch_csv << ch.chain_id << ',' << chain_seed(c.seed, static_cast<std::size_t>(ch.chain_id)) << ','
           << csv::format_double(ch.acceptance_rate);
    for (double v : ch.start) ch_csv << ',' << csv::format_double(v);
    for (double v : ch.proposal_std) ch_csv << ',' << csv::format_double(v);
    ch_csv << '\n';
  }
  files.emplace_back("chains.csv", ch_csv.str());
  files.emplace_back("fit_run.txt", metadata({{"command", "fit"},
                                              {"seed", std::to_string(c.seed)},
                                              {"games", std::to_string(records.size())},
                                              {"training_filter", c.training_filter},
                                              {"chains", std::to_string(c.chains)},
                                              {"iterations", std::to_string(c.chain.n_iterations)},
                                              {"burn_in", std::to_string(c.chain.burn_in)},
                                              {"thin", std::to_string(c.chain.thin)},
                                              {"tune_rounds", std::to_string(c.chain.tune_rounds)},
                                              {"r_max", csv::format_double(c.prior.r_max)},
                                              {"chain_seed_rule", "derive_seed(seed, chain)"}}));
  write_outputs(c.out, files);

  char line[160];
  out << "fit: " << records.size() << " games, " << c.chains << " chain(s), " << pooled.size() << " retained draws\n";
  std::snprintf(line, sizeof line, "%-4s %9s %9s %9s %9s %8s %9s\n", "", "mean", "sd", "q05", "q95", "R-hat", "ESS");
  out << line;
  for (std::size_t p = 0; p < 3; ++p) {
    std::snprintf(line, sizeof line, "%-4s %9.4f %9.4f %9.4f %9.4f %8.4f %9.1f\n", kNames[p], summary[p].mean,
                  summary[p].sd, summary[p].q05, summary[p].q95, rhat[p], ess[p]);
    out << line;
  }
  for (const auto& ch : chains) {
    std::snprintf(line, sizeof line, "chain %d acceptance %.3f\n", ch.chain_id, ch.acceptance_rate);
    out << line;
  }
  for (const auto& w : boundary_warnings(means, c.prior)) err << "warning: " << w << '\n';

  bool converged = true;
  for (std::size_t p = 0; p < 3; ++p)
    if (!(rhat[p] <= 1.1)) {
      err << "error: split R-hat for " << kNames[p] << " is " << csv::format_fixed(rhat[p], 4) << " (> 1.1)\n";
      converged = false;
    }
  return converged ? kOk : kValidationFailure;
}

// ---- noise ------------------------------------------------------------------

inline int cmd_noise(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_path(c.history, "history", "noise");
  std::optional<LeagueStructure> league;
  if (!c.league.empty()) league = load_league(c.league);
  const auto records = derive_pregame_records(load_log(c.history, league ? &*league : nullptr));
  const auto run = estimate_noise_pools(records, c.window, c.early_games, c.threads);
  for (const auto& w : run.warnings) err << "warning: " << w << '\n';
  if (run.converged == 0) throw std::runtime_error("noise: no window fit converged");

  std::vector<std::pair<std::string, std::string>> files;
  for (auto t : kTerciles)
    files.emplace_back(noise_pool_name(t), to_text([&](std::ostream& os) {
                         write_noise_pool_csv(os, run.pools[static_cast<std::size_t>(t)]);
                       }));
  files.emplace_back("terciles.csv", to_text([&](std::ostream& os) { write_terciles_csv(os, run.terciles); }));
  files.emplace_back("noise_run.txt", metadata({{"command", "noise"},
                                                {"window", std::to_string(c.window)},
                                                {"early_games", std::to_string(c.early_games)},
                                                {"windows", std::to_string(run.windows)},
                                                {"converged", std::to_string(run.converged)}}));
  write_outputs(c.noise_dir, files);

  out << "noise: " << run.converged << " of " << run.windows << " window fits converged\n";
  for (auto t : kTerciles) {
    const auto& pool = run.pools[static_cast<std::size_t>(t)];
    std::vector<double> so, sp;
    for (const auto& e : pool) {
      so.push_back(e.params.sigma_obs);
      sp.push_back(e.params.sigma_process);
    }
    out << "  " << to_string(t) << ": " << pool.size() << " windows";
    if (!pool.empty())
      out << ", median sigma_obs " << csv::format_fixed(median(so), 4) << ", median sigma_process "
          << csv::format_fixed(median(sp), 4);
    out << '\n';
  }
  return kOk;
}

// ---- simulate ---------------------------------------------------------------

inline NoisePools load_noise_pools(const fs::path& dir) {
  NoisePools pools;
  for (auto t : kTerciles) {
    const auto path = dir / noise_pool_name(t);
    if (!fs::exists(path))
      throw std::runtime_error("noise pool " + path.string() + " not found; run `seasonsim noise` first");
    auto in = open_input(path, "noise pool");
    for (const auto& e : parse_noise_pool_csv(in, path.string())) pools.add(t, e);
    if (pools.pool(t).empty())
      throw std::runtime_error("noise pool " + path.string() + " has no converged estimates");
  }
  return pools;
}

inline std::vector<std::pair<std::string, std::string>> histogram_files(const std::vector<SeasonResult>& results,
                                                                        const std::vector<std::string>& names,
                                                                        const std::vector<std::string>& teams) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& t : teams)
    files.emplace_back("hist_" + t + ".csv", to_text([&](std::ostream& os) {
                         write_histogram_csv(os, export_win_histogram(results, names, t));
                       }));
  return files;
}

inline void check_teams(const std::vector<std::string>& requested, const LeagueStructure& league) {
  const LeagueIndex idx{league};
  for (const auto& t : requested)
    if (!idx.find(t)) throw UsageError("unknown team '" + t + "' requested for a histogram");
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_path(c.league, "league", "simulate");
  require_path(c.season, "season", "simulate");
  if (!c.schedule.empty()) require_path(c.schedule, "schedule", "simulate");
  const auto league = load_league(c.league);
  check_teams(c.teams, league);

  PosteriorSample posterior;
  std::string posterior_source;
  if (c.sim.draws == DrawMode::point && c.point_r) {
    posterior = PosteriorSample::point(*c.point_r);
    posterior_source = "point_r";
  } else {
    if (!fs::exists(c.draws_file))
      throw std::runtime_error("posterior draws " + c.draws_file.string() + " not found; run `seasonsim fit` first");
    auto in = open_input(c.draws_file, "posterior draws");
    posterior = PosteriorSample{parse_draws_csv(in, c.draws_file.string())};
    posterior_source = "draws_file";
  }
  const auto pools = load_noise_pools(c.noise_dir);

  auto rows = load_log(c.season, &league);
  if (rows.empty()) throw std::runtime_error(c.season + ": no games in the current season log");
  const auto year = rows.back().date.year();
  std::erase_if(rows, [&](const RawGameRow& r) { return r.date.year() != year; });
  const auto records = derive_pregame_records(rows);
  const auto prepared = prepare_season(records, league, &pools, NoiseParams{0.5, 0.05}, c.early_games);

  SeasonInputs in;
  in.league = league;
  in.teams = prepared.teams;
  in.posterior = posterior;
  in.noise_pools = pools;
  in.cfg = c.sim;
  in.cfg.walk.league_mean = prepared.league_mean_avg;
  const std::uint64_t schedule_seed = derive_seed(c.seed, 0x5c4ed);
  if (!c.schedule.empty()) {
    auto sin = open_input(c.schedule, "schedule");
    in.schedule = parse_schedule(sin, c.schedule);
  } else {
    std::map<std::string, int> played;
    for (const auto& s : prepared.teams) played[s.team] = s.games();
    Rng rng{schedule_seed};
    in.schedule = generate_schedule(league, played, add_days(records.back().date, 1), rng);
    err << "warning: no schedule file given; using a synthetic remaining schedule\n";
  }
  if (const auto issues = season_input_issues(in); !issues.empty()) {
    for (const auto& i : issues) err << "issue: " << i << '\n';
    return kValidationFailure;
  }

  const auto results = run_replications(c.replications, in, c.seed, c.threads);
  const auto names = league.teams();
  const auto summary = summarize(results, names);

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("replications.csv",
                     to_text([&](std::ostream& os) { write_replications_csv(os, results, names); }));
  files.emplace_back("summary.csv", to_text([&](std::ostream& os) { write_summary_csv(os, summary); }));
  files.emplace_back("seeds.csv", to_text([&](std::ostream& os) {
                       os << "replication,seed\n";
                       for (const auto& r : results) os << r.replication_id << ',' << r.seed << '\n';
                     }));
  for (auto& f : histogram_files(results, names, c.teams)) files.push_back(std::move(f));
  files.emplace_back(
      "simulate_run.txt",
      metadata({{"command", "simulate"},
                {"seed", std::to_string(c.seed)},
                {"replication_seed_rule", "derive_seed(seed, replication)"},
                {"replications", std::to_string(c.replications)},
                {"mode", std::string(to_string(c.sim.probability))},
                {"draws", std::string(to_string(c.sim.draws))},
                {"era_input", std::string(to_string(c.sim.era_input))},
                {"m", csv::format_double(c.sim.m)},
                {"burn_in_games", std::to_string(c.sim.burn_in_games)},
                {"walk_std", csv::format_double(c.sim.walk.step_std)},
                {"league_mean_avg", csv::format_double(prepared.league_mean_avg)},
                {"posterior_source", posterior_source},
                {"posterior_draws", std::to_string(posterior.draws().size())},
                {"schedule", in.schedule.synthetic ? "synthetic" : "file"},
                {"schedule_seed", in.schedule.synthetic ? std::to_string(schedule_seed) : "-"},
                {"scheduled_games", std::to_string(in.schedule.games.size())}}));
  write_outputs(c.out, files);

  out << "Projected season, " << c.replications << " replications"
      << (in.schedule.synthetic ? " (synthetic schedule)" : "") << "\n";
  write_summary_table(out, summary);
  return kOk;
}

// ---- report -----------------------------------------------------------------

// Re-renders the summary and requested histograms from a replications table.
inline int cmd_report(const RunConfig& c, std::ostream& out, std::ostream&) {
  require_path(c.league, "league", "report");
  const auto league = load_league(c.league);
  check_teams(c.teams, league);
  const auto path = c.out / "replications.csv";
  if (!fs::exists(path)) throw std::runtime_error(path.string() + " not found; run `seasonsim simulate` first");
  auto in = open_input(path, "replications table");
  const auto names = league.teams();
  const auto results = parse_replications_csv(in, names, path.string());
  if (results.empty()) throw std::runtime_error(path.string() + ": no replications");
  const auto summary = summarize(results, names);
  auto files = histogram_files(results, names, c.teams);
  files.emplace_back("summary.csv", to_text([&](std::ostream& os) { write_summary_csv(os, summary); }));
  write_outputs(c.out, files);
  write_summary_table(out, summary);
  return kOk;
}

// ---- entry point ------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian game-outcome model and Monte Carlo season simulator", "seasonsim"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets, teams;
  Settings flags;
  app.add_option("--config", config_path, "flat key = value configuration file");
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    return app.add_option_function<std::string>(
        "--" + name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  flag("seed", "seed", "master seed (unsigned 64-bit)")->check(CLI::NonNegativeNumber);
  flag("replications", "replications", "number of simulated seasons")->check(CLI::PositiveNumber);
  flag("mode", "mode", "win probability: marginal or two-stage")->check(CLI::IsMember({"marginal", "two-stage"}));
  flag("draws", "draws", "posterior-predictive or point")->check(CLI::IsMember({"posterior-predictive", "point"}));
  flag("out", "out", "output directory");
  flag("threads", "threads", "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  flag("league", "league", "league structure file");
  flag("history", "history", "historical game log");
  flag("season", "season", "current-season game log");
  flag("schedule", "schedule", "remaining-season schedule");
  app.add_option("--team", teams, "write a win histogram for this team (repeatable)");
  app.add_option("--set", sets, "override any setting as key=value (repeatable)");

  std::vector<std::pair<std::string, std::function<int(const RunConfig&, std::ostream&, std::ostream&)>>> commands{
      {"validate", cmd_validate}, {"fit", cmd_fit},     {"noise", cmd_noise},
      {"simulate", cmd_simulate}, {"report", cmd_report}};
  const std::map<std::string, std::string> help{
      {"validate", "check league structure, logs and schedule"},
      {"fit", "sample the exponent posterior"},
      {"noise", "estimate ERA noise pools by tercile"},
      {"simulate", "simulate the rest of the season"},
      {"report", "re-render the summary from replications.csv"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    Settings overrides = flags;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      overrides[std::string(csv::trim(kv.substr(0, eq)))] = std::string(csv::trim(kv.substr(eq + 1)));
    }
    if (!teams.empty()) {
      std::string joined;
      for (const auto& t : teams) joined += (joined.empty() ? "" : ",") + t;
      overrides["teams"] = joined;
    }
    const Settings file_values = config_path.empty() ? Settings{} : read_config_file(config_path);
    const RunConfig cfg = resolve_config(file_values, overrides);
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(cfg, out, err);
    return kUsageError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace seasonsim::cli
