#pragma once

// Game-log ingestion: parsing and validation, pregame win-percentage
// derivation, and training-window filtering.
//
// Accepted header columns (any order):
//   required: date, home, away, home_avg_pre, away_avg_pre, home_era_pre, away_era_pre
//   outcome:  home_won, or home_runs + away_runs (or all three)
//   optional: home_winpct_pre + away_winpct_pre (empty cells mean "derive")

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seasonsim/csv.hpp"
#include "seasonsim/date.hpp"
#include "seasonsim/model.hpp"

namespace seasonsim {

class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& source, std::size_t line, const std::string& column, const std::string& what)
      : std::runtime_error(source + ": row " + std::to_string(line) +
                           (column.empty() ? "" : ", column " + column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

struct RawGameRow {
  std::size_t line = 0;  // 1-based line in the source, header is line 1
  Date date{};
  std::string home;
  std::string away;
  std::optional<bool> home_won;
  std::optional<int> home_runs;
  std::optional<int> away_runs;
  std::optional<double> home_winpct;
  std::optional<double> away_winpct;
  double home_avg = 0.0;
  double away_avg = 0.0;
  double home_era = 0.0;
  double away_era = 0.0;

  bool operator==(const RawGameRow&) const = default;
};

namespace detail {

inline constexpr std::array<const char*, 7> kRequiredColumns{
    "date", "home", "away", "home_avg_pre", "away_avg_pre", "home_era_pre", "away_era_pre"};

}  // namespace detail

// Parses a comma-separated game log. When `known_teams` is nonempty, team
// codes outside it are rejected.
inline std::vector<RawGameRow> parse_game_log(std::istream& in, const std::string& source = "game log",
                                              const std::set<std::string>& known_teams = {}) {
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> col;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!csv::trim(line).empty()) break;
  }
  if (csv::trim(line).empty()) throw IngestError(source, lineno, "", "missing header");
  header = csv::split(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!col.emplace(header[i], i).second) throw IngestError(source, lineno, header[i], "duplicate column");
  }
  for (const char* c : detail::kRequiredColumns)
    if (!col.count(c)) throw IngestError(source, lineno, c, "missing column");
  const bool has_won = col.count("home_won") > 0;
  const bool has_runs = col.count("home_runs") > 0 || col.count("away_runs") > 0;
  if (has_runs && !(col.count("home_runs") && col.count("away_runs")))
    throw IngestError(source, lineno, col.count("home_runs") ? "away_runs" : "home_runs", "missing column");
  if (!has_won && !has_runs) throw IngestError(source, lineno, "home_won", "missing column");
  const bool has_pct = col.count("home_winpct_pre") > 0 || col.count("away_winpct_pre") > 0;
  if (has_pct && !(col.count("home_winpct_pre") && col.count("away_winpct_pre")))
    throw IngestError(source, lineno, col.count("home_winpct_pre") ? "away_winpct_pre" : "home_winpct_pre",
                      "missing column");

  std::vector<RawGameRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != header.size())
      throw IngestError(source, lineno, "",
                        "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    auto cell = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
    auto number = [&](const char* name) {
      const auto v = csv::parse_double(cell(name));
      if (!v) throw IngestError(source, lineno, name, "not a number: '" + cell(name) + "'");
      return *v;
    };
    auto team = [&](const char* name) {
      const auto& t = cell(name);
      if (t.empty()) throw IngestError(source, lineno, name, "empty team code");
      if (!known_teams.empty() && !known_teams.count(t))
        throw IngestError(source, lineno, name, "unknown team '" + t + "'");
      return t;
    };

    RawGameRow r;
    r.line = lineno;
    const auto d = parse_iso_date(cell("date"));
    if (!d) throw IngestError(source, lineno, "date", "invalid date '" + cell("date") + "'");
    r.date = *d;
    r.home = team("home");
    r.away = team("away");
    if (r.home == r.away) throw IngestError(source, lineno, "away", "team cannot play itself");

    if (has_won) {
      const auto& w = cell("home_won");
      if (w == "1" || w == "true") r.home_won = true;
      else if (w == "0" || w == "false") r.home_won = false;
      else if (!(w.empty() && has_runs)) throw IngestError(source, lineno, "home_won", "expected 0 or 1, found '" + w + "'");
    }
    if (has_runs) {
      for (const char* name : {"home_runs", "away_runs"}) {
        const auto& c = cell(name);
        if (c.empty() && r.home_won) continue;
        const auto v = csv::parse_int<int>(c);
        if (!v || *v < 0) throw IngestError(source, lineno, name, "expected a nonnegative integer, found '" + c + "'");
        (std::string_view(name) == "home_runs" ? r.home_runs : r.away_runs) = *v;
      }
      if (r.home_runs.has_value() != r.away_runs.has_value())
        throw IngestError(source, lineno, r.home_runs ? "away_runs" : "home_runs", "missing run total");
      if (r.home_runs && *r.home_runs == *r.away_runs)
        throw IngestError(source, lineno, "home_runs", "tied run totals");
      if (r.home_runs && r.home_won && (*r.home_runs > *r.away_runs) != *r.home_won)
        throw IngestError(source, lineno, "home_won", "disagrees with run totals");
    }
    if (has_pct) {
      for (const char* name : {"home_winpct_pre", "away_winpct_pre"}) {
        if (cell(name).empty()) continue;
        const double v = number(name);
        if (v < 0.0 || v > 1.0) throw IngestError(source, lineno, name, "win percentage outside [0, 1]");
        (std::string_view(name) == "home_winpct_pre" ? r.home_winpct : r.away_winpct) = v;
      }
    }
    r.home_avg = number("home_avg_pre");
    r.away_avg = number("away_avg_pre");
    for (const char* name : {"home_avg_pre", "away_avg_pre"}) {
      const double v = std::string_view(name) == "home_avg_pre" ? r.home_avg : r.away_avg;
      if (!(v > 0.0 && v < 1.0)) throw IngestError(source, lineno, name, "batting average outside (0, 1)");
    }
    r.home_era = number("home_era_pre");
    r.away_era = number("away_era_pre");
    for (const char* name : {"home_era_pre", "away_era_pre"}) {
      const double v = std::string_view(name) == "home_era_pre" ? r.home_era : r.away_era;
      if (v < 0.0) throw IngestError(source, lineno, name, "negative ERA");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// Writes rows in the canonical column order. Optional column groups are
// emitted when any row carries them; absent values become empty cells.
inline void write_game_log(std::ostream& os, const std::vector<RawGameRow>& rows) {
  const bool won = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.home_won.has_value(); });
  const bool runs = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.home_runs.has_value(); });
  const bool pct = std::any_of(rows.begin(), rows.end(),
                               [](const auto& r) { return r.home_winpct.has_value() || r.away_winpct.has_value(); });
  const bool outcome_by_won = won || !runs;
  os << "date,home,away";
  if (outcome_by_won) os << ",home_won";
  if (pct) os << ",home_winpct_pre,away_winpct_pre";
  os << ",home_avg_pre,away_avg_pre,home_era_pre,away_era_pre";
  if (runs) os << ",home_runs,away_runs";
  os << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    os << format_iso_date(r.date) << ',' << r.home << ',' << r.away;
    if (outcome_by_won) os << ',' << (r.home_won ? (*r.home_won ? "1" : "0") : "");
    if (pct) os << ',' << opt(r.home_winpct) << ',' << opt(r.away_winpct);
    os << ',' << csv::format_double(r.home_avg) << ',' << csv::format_double(r.away_avg) << ','
       << csv::format_double(r.home_era) << ',' << csv::format_double(r.away_era);
    if (runs)
      os << ',' << (r.home_runs ? std::to_string(*r.home_runs) : "") << ','
         << (r.away_runs ? std::to_string(*r.away_runs) : "");
    os << '\n';
  }
}

inline bool row_home_won(const RawGameRow& r) {
  if (r.home_won) return *r.home_won;
  if (r.home_runs && r.away_runs) return *r.home_runs > *r.away_runs;
  throw std::invalid_argument("row " + std::to_string(r.line) + ": no outcome");
}

// Builds model records in input order. Win percentages missing from a row
// are taken from each team's record earlier in the same calendar year; a
// team with no prior games gets 0.5 and the record is flagged.
inline std::vector<GameRecord> derive_pregame_records(const std::vector<RawGameRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date < rows[i - 1].date)
      throw std::invalid_argument("derive_pregame_records: rows not sorted by date (row " +
                                  std::to_string(rows[i].line) + ")");
  struct Tally {
    int wins = 0;
    int losses = 0;
  };
  std::map<std::pair<int, std::string>, Tally> tally;
  std::vector<GameRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const int year = static_cast<int>(r.date.year());
    auto& h = tally[{year, r.home}];
    auto& a = tally[{year, r.away}];
    const bool won = row_home_won(r);
    GameRecord g;
    g.date = r.date;
    g.home_team = r.home;
    g.away_team = r.away;
    g.home_won = won;
    g.home_games_played = h.wins + h.losses;
    g.away_games_played = a.wins + a.losses;
    auto pct = [&](const Tally& t, const std::optional<double>& given) {
      if (given) return *given;
      if (t.wins + t.losses == 0) {
        g.winpct_defaulted = true;
        return 0.5;
      }
      return static_cast<double>(t.wins) / static_cast<double>(t.wins + t.losses);
    };
    g.home = {pct(h, r.home_winpct), r.home_avg, r.home_era};
    g.away = {pct(a, r.away_winpct), r.away_avg, r.away_era};
    out.push_back(std::move(g));
    (won ? h.wins : h.losses) += 1;
    (won ? a.losses : a.wins) += 1;
  }
  return out;
}

struct DatasetFilter {
  unsigned start_month = 5;
  unsigned start_day = 20;
  unsigned end_month = 8;
  unsigned end_day = 20;
  int min_games_played = 0;

  // May 20 to August 20 inclusive.
  static DatasetFilter date_window() { return {}; }
  // Whole calendar year, both teams past game 50.
  static DatasetFilter games_played() { return {1, 1, 12, 31, 50}; }

  void validate() const {
    const std::chrono::month_day s{std::chrono::month{start_month}, std::chrono::day{start_day}};
    const std::chrono::month_day e{std::chrono::month{end_month}, std::chrono::day{end_day}};
    if (!s.ok() || !e.ok()) throw std::invalid_argument("DatasetFilter: invalid month/day bound");
    if (e < s) throw std::invalid_argument("DatasetFilter: start after end");
    if (min_games_played < 0) throw std::invalid_argument("DatasetFilter: negative min_games_played");
  }

  bool keeps(const GameRecord& g) const {
    const std::chrono::month_day md{g.date.month(), g.date.day()};
    const std::chrono::month_day s{std::chrono::month{start_month}, std::chrono::day{start_day}};
    const std::chrono::month_day e{std::chrono::month{end_month}, std::chrono::day{end_day}};
    return s <= md && md <= e && g.home_games_played >= min_games_played && g.away_games_played >= min_games_played;
  }
};

inline std::vector<GameRecord> filter_training_window(const std::vector<GameRecord>& records,
                                                      const DatasetFilter& filter) {
  filter.validate();
  std::vector<GameRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const GameRecord& g) { return filter.keeps(g); });
  return out;
}

// Per team, the starter ERA the team sent out in each of its games, in
// game order; keyed by (calendar year, team).
inline std::map<std::pair<int, std::string>, std::vector<double>> team_era_series(
    const std::vector<GameRecord>& records) {
  std::map<std::pair<int, std::string>, std::vector<double>> out;
  for (const auto& g : records) {
    const int year = static_cast<int>(g.date.year());
    out[{year, g.home_team}].push_back(g.home.era);
    out[{year, g.away_team}].push_back(g.away.era);
  }
  return out;
}

// Per team, pregame batting average before each of its games; keyed like
// team_era_series.
inline std::map<std::pair<int, std::string>, std::vector<double>> team_batting_series(
    const std::vector<GameRecord>& records) {
  std::map<std::pair<int, std::string>, std::vector<double>> out;
  for (const auto& g : records) {
    const int year = static_cast<int>(g.date.year());
    out[{year, g.home_team}].push_back(g.home.avg);
    out[{year, g.away_team}].push_back(g.away.avg);
  }
  return out;
}

}  // namespace seasonsim
