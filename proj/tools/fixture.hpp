#pragma once

// Synthetic fixture directory: league structure, historical game logs,
// a partially played current season, its remaining schedule and a config.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seasonsim/ingest.hpp"
#include "seasonsim/league.hpp"
#include "seasonsim/random.hpp"
#include "seasonsim/synthetic.hpp"

namespace seasonsim::fixture {

struct FixtureOptions {
  std::uint64_t seed = 2025;
  int first_history_year = 2022;
  int history_seasons = 3;
  int history_rounds = -1;  // -1 plays the whole season
  int current_year = 2025;
  int current_rounds = 20;
  synthetic::SeasonGenerator generator;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os{path, std::ios::binary};
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

inline void write_fixture(const std::filesystem::path& dir, const FixtureOptions& opt = {}) {
  std::filesystem::create_directories(dir);
  const auto league = synthetic::standard_league();

  std::vector<RawGameRow> history;
  for (int k = 0; k < opt.history_seasons; ++k) {
    Rng rng = make_stream(opt.seed, static_cast<std::uint64_t>(k));
    const auto s = synthetic::synthesize_season(league, opt.first_history_year + k, opt.generator, rng,
                                                opt.history_rounds);
    history.insert(history.end(), s.played.begin(), s.played.end());
  }

  Rng rng = make_stream(opt.seed, 1000);
  auto current = synthetic::synthesize_season(league, opt.current_year, opt.generator, rng, opt.current_rounds);
  // The current season ships as a raw outcome log; records are derived.
  for (auto& r : current.played) {
    r.home_winpct.reset();
    r.away_winpct.reset();
  }

  std::ostringstream os;
  write_league(os, league);
  write_text(dir / "league.csv", os.str());
  os.str("");
  write_game_log(os, history);
  write_text(dir / "history.csv", os.str());
  os.str("");
  write_game_log(os, current.played);
  write_text(dir / "season.csv", os.str());
  os.str("");
  write_schedule(os, current.remaining);
  write_text(dir / "schedule.csv", os.str());

  write_text(dir / "config.txt",
             "# synthetic fixture\n"
             "league = league.csv\n"
             "history = history.csv\n"
             "season = season.csv\n"
             "schedule = schedule.csv\n"
             "out = out\n"
             "seed = " + std::to_string(opt.seed) + "\n");
}

}  // namespace seasonsim::fixture
