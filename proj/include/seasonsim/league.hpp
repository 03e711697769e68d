#pragma once

// League organisation (leagues -> divisions -> teams) and schedules.

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "seasonsim/csv.hpp"
#include "seasonsim/date.hpp"
#include "seasonsim/random.hpp"

namespace seasonsim {

struct Division {
  std::string name;
  std::vector<std::string> teams;
};

struct League {
  std::string name;
  std::vector<Division> divisions;
};

struct LeagueStructure {
  std::vector<League> leagues;
  int season_length = 162;
  int wildcards_per_league = 3;

  // Teams in declaration order; this order indexes every per-team vector.
  std::vector<std::string> teams() const {
    std::vector<std::string> out;
    for (const auto& l : leagues)
      for (const auto& d : l.divisions) out.insert(out.end(), d.teams.begin(), d.teams.end());
    return out;
  }

  std::size_t team_count() const { return teams().size(); }

  // Problems with the partition; empty when the structure is usable.
  std::vector<std::string> issues() const {
    std::vector<std::string> out;
    if (leagues.empty()) out.push_back("league structure has no leagues");
    if (season_length <= 0) out.push_back("season_length must be positive");
    if (wildcards_per_league < 0) out.push_back("wildcards_per_league must be nonnegative");
    std::map<std::string, std::string> seen;
    for (const auto& l : leagues) {
      if (l.divisions.empty()) out.push_back("league " + l.name + " has no divisions");
      std::size_t league_teams = 0;
      for (const auto& d : l.divisions) {
        const std::string where = l.name + "/" + d.name;
        if (d.teams.empty()) out.push_back("division " + where + " has no teams");
        if (d.teams.size() != l.divisions.front().teams.size())
          out.push_back("division " + where + " size differs from other divisions in league " + l.name);
        league_teams += d.teams.size();
        for (const auto& t : d.teams) {
          auto [it, inserted] = seen.emplace(t, where);
          if (!inserted) out.push_back("team " + t + " appears in both " + it->second + " and " + where);
        }
      }
      const std::size_t qualifiers = l.divisions.size() + static_cast<std::size_t>(std::max(wildcards_per_league, 0));
      if (!l.divisions.empty() && league_teams < qualifiers)
        out.push_back("league " + l.name + " has fewer teams than playoff berths");
    }
    return out;
  }

  void validate() const {
    const auto problems = issues();
    if (!problems.empty()) throw std::invalid_argument("malformed league structure: " + problems.front());
  }
};

// Reads rows of `league,division,team` (header required). Rows are grouped in
// order of first appearance. Structural problems are left to issues().
inline LeagueStructure parse_league(std::istream& in, const std::string& source = "league file") {
  LeagueStructure ls;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = csv::split(t);
    if (!header) {
      if (f.size() != 3 || f[0] != "league" || f[1] != "division" || f[2] != "team")
        throw std::runtime_error(source + ": line " + std::to_string(lineno) +
                                 ": expected header league,division,team");
      header = true;
      continue;
    }
    if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty())
      throw std::runtime_error(source + ": line " + std::to_string(lineno) +
                               ": expected three nonempty fields");
    auto lit = std::find_if(ls.leagues.begin(), ls.leagues.end(), [&](const League& l) { return l.name == f[0]; });
    if (lit == ls.leagues.end()) {
      ls.leagues.push_back({f[0], {}});
      lit = std::prev(ls.leagues.end());
    }
    auto dit = std::find_if(lit->divisions.begin(), lit->divisions.end(),
                            [&](const Division& d) { return d.name == f[1]; });
    if (dit == lit->divisions.end()) {
      lit->divisions.push_back({f[1], {}});
      dit = std::prev(lit->divisions.end());
    }
    dit->teams.push_back(f[2]);
  }
  if (!header) throw std::runtime_error(source + ": missing header league,division,team");
  return ls;
}

inline void write_league(std::ostream& os, const LeagueStructure& ls) {
  os << "league,division,team\n";
  for (const auto& l : ls.leagues)
    for (const auto& d : l.divisions)
      for (const auto& t : d.teams) os << l.name << ',' << d.name << ',' << t << '\n';
}

// Team-name lookup plus league/division membership by index.
class LeagueIndex {
 public:
  explicit LeagueIndex(const LeagueStructure& ls) : names_(ls.teams()) {
    for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
    league_of_.resize(names_.size());
    division_of_.resize(names_.size());
    std::size_t div_id = 0;
    for (std::size_t l = 0; l < ls.leagues.size(); ++l) {
      for (const auto& d : ls.leagues[l].divisions) {
        for (const auto& t : d.teams) {
          const auto i = index_.at(t);
          league_of_[i] = l;
          division_of_[i] = div_id;
        }
        ++div_id;
      }
    }
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::size_t> find(const std::string& team) const {
    auto it = index_.find(team);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t at(const std::string& team) const {
    auto it = index_.find(team);
    if (it == index_.end()) throw std::invalid_argument("unknown team " + team);
    return it->second;
  }
  std::size_t league_of(std::size_t i) const { return league_of_[i]; }
  std::size_t division_of(std::size_t i) const { return division_of_[i]; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> league_of_;
  std::vector<std::size_t> division_of_;
};

struct ScheduledGame {
  Date date{};
  std::string home;
  std::string away;
};

struct Schedule {
  std::vector<ScheduledGame> games;
  bool synthetic = false;
};

inline Schedule parse_schedule(std::istream& in, const std::string& source = "schedule file") {
  Schedule s;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = csv::split(t);
    const std::string where = source + ": line " + std::to_string(lineno);
    if (!header) {
      if (f.size() != 3 || f[0] != "date" || f[1] != "home" || f[2] != "away")
        throw std::runtime_error(where + ": expected header date,home,away");
      header = true;
      continue;
    }
    if (f.size() != 3) throw std::runtime_error(where + ": expected 3 fields");
    const auto d = parse_iso_date(f[0]);
    if (!d) throw std::runtime_error(where + ", column date: invalid date '" + f[0] + "'");
    if (f[1].empty() || f[2].empty()) throw std::runtime_error(where + ": empty team");
    if (f[1] == f[2]) throw std::runtime_error(where + ": team " + f[1] + " cannot play itself");
    s.games.push_back({*d, f[1], f[2]});
  }
  if (!header) throw std::runtime_error(source + ": missing header date,home,away");
  return s;
}

inline void write_schedule(std::ostream& os, const Schedule& s) {
  os << "date,home,away\n";
  for (const auto& g : s.games) os << format_iso_date(g.date) << ',' << g.home << ',' << g.away << '\n';
}

// Synthetic remaining-season schedule. Games are laid out in daily rounds;
// every team still owed games plays at most once per round. An opponent is a
// division rival with probability 0.6 (when one is available), otherwise any
// team still owed games. `played` counts games already played per team
// (missing teams count as 0).
inline Schedule generate_schedule(const LeagueStructure& ls, const std::map<std::string, int>& played,
                                  const Date& start, Rng& rng, double division_weight = 0.6) {
  ls.validate();
  const LeagueIndex idx{ls};
  const std::size_t n = idx.size();
  std::vector<int> need(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = played.find(idx.names()[i]);
    const int p = it == played.end() ? 0 : it->second;
    if (p > ls.season_length) throw std::invalid_argument("generate_schedule: team played more than a season");
    need[i] = ls.season_length - p;
  }
  Schedule s;
  s.synthetic = true;
  Date day = start;
  std::size_t stalled = 0;
  for (;;) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n; ++i)
      if (need[i] > 0) open.push_back(i);
    if (open.empty()) break;
    if (open.size() == 1)
      throw std::invalid_argument("generate_schedule: cannot complete schedule for " + idx.names()[open[0]]);
    std::shuffle(open.begin(), open.end(), rng);
    // Teams owed the most games are paired first.
    std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) { return need[a] > need[b]; });
    std::vector<char> used(n, 0);
    std::size_t paired = 0;
    for (std::size_t a : open) {
      if (used[a]) continue;
      std::vector<std::size_t> rivals, others;
      for (std::size_t b : open) {
        if (b == a || used[b]) continue;
        (idx.division_of(b) == idx.division_of(a) ? rivals : others).push_back(b);
      }
      if (rivals.empty() && others.empty()) continue;
      const bool pick_rival = !rivals.empty() && (others.empty() || uniform01(rng) < division_weight);
      const auto& pool = pick_rival ? rivals : others;
      const std::size_t b = pool[uniform_index(rng, pool.size())];
      used[a] = used[b] = 1;
      --need[a];
      --need[b];
      ++paired;
      const bool a_home = uniform01(rng) < 0.5;
      s.games.push_back({day, idx.names()[a_home ? a : b], idx.names()[a_home ? b : a]});
    }
    stalled = paired == 0 ? stalled + 1 : 0;
    if (stalled > 0) throw std::invalid_argument("generate_schedule: no pairing possible");
    day = add_days(day, 1);
  }
  return s;
}

}  // namespace seasonsim
