#include <iostream>

#include "CLI11.hpp"
#include "fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic league, game logs, schedule and config", "seasonsim_fixture"};
  std::string dir = "fixture";
  seasonsim::fixture::FixtureOptions opt;
  app.add_option("dir", dir, "output directory")->capture_default_str();
  app.add_option("--seed", opt.seed, "generator seed")->capture_default_str();
  app.add_option("--seasons", opt.history_seasons, "historical seasons")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--history-rounds", opt.history_rounds, "daily rounds per historical season, -1 for all")
      ->capture_default_str();
  app.add_option("--rounds", opt.current_rounds, "rounds already played this season")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  try {
    seasonsim::fixture::write_fixture(dir, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  std::cout << "fixture written to " << dir << '\n';
  return 0;
}
