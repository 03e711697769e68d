#pragma once

// Random-walk Metropolis over the contribution exponents (r1, r2, r3) under
// independent Uniform(0, r_max) priors, with split R-hat, effective sample
// size and trace export.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seasonsim/csv.hpp"
#include "seasonsim/model.hpp"
#include "seasonsim/parallel.hpp"
#include "seasonsim/random.hpp"
#include "seasonsim/stats.hpp"

namespace seasonsim {

struct PriorConfig {
  double r_max = 5.0;

  bool contains(const Exponents& r) const noexcept {
    return std::all_of(r.begin(), r.end(), [&](double v) { return v >= 0.0 && v <= r_max; });
  }
};

struct ChainConfig {
  std::size_t n_iterations = 20000;
  std::size_t burn_in = 2000;
  std::size_t thin = 5;
  Exponents proposal_std{0.05, 0.05, 0.05};
  std::uint64_t seed = 20250520;
  // Start point; (1, 1, 1) when unset (pulled into the prior box if needed).
  std::optional<Exponents> initial;
  // Pre-run tuning sweep: rescales proposal_std toward target_acceptance.
  // Zero rounds keeps proposal_std as given.
  std::size_t tune_rounds = 0;
  std::size_t tune_iterations = 500;
  double target_acceptance = 0.3;

  void validate() const {
    if (n_iterations == 0) throw std::invalid_argument("ChainConfig: n_iterations must be positive");
    if (burn_in >= n_iterations)
      throw std::invalid_argument("ChainConfig: burn_in must be smaller than n_iterations");
    if (thin == 0) throw std::invalid_argument("ChainConfig: thin must be positive");
    for (double s : proposal_std)
      if (!(s > 0.0) || !std::isfinite(s))
        throw std::invalid_argument("ChainConfig: proposal_std must be positive");
    if (tune_rounds > 0 && tune_iterations == 0)
      throw std::invalid_argument("ChainConfig: tune_iterations must be positive");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
      throw std::invalid_argument("ChainConfig: target_acceptance must be in (0, 1)");
  }
};

struct PosteriorDraws {
  std::vector<Exponents> draws;
  std::vector<std::size_t> iterations;  // sampler iteration of each retained draw
  double acceptance_rate = 0.0;
  std::size_t accepted = 0;
  std::size_t proposed = 0;
  int chain_id = 0;
  Exponents start{};
  Exponents proposal_std{};  // after tuning

  std::vector<double> column(std::size_t param) const {
    std::vector<double> out;
    out.reserve(draws.size());
    for (const auto& d : draws) out.push_back(d[param]);
    return out;
  }
};

namespace detail {

struct Walker {
  const LogRatioTable& table;
  const PriorConfig& prior;
  Exponents state;
  double log_post;

  Walker(const LogRatioTable& t, const PriorConfig& p, const Exponents& start)
      : table(t), prior(p), state(start), log_post(t.log_likelihood(start)) {}

  // One joint proposal; returns whether it was accepted. The prior is flat
  // inside the box, so the log posterior difference is the log likelihood
  // difference.
  bool step(const Exponents& scale, Rng& rng) {
    Exponents proposal;
    for (std::size_t k = 0; k < 3; ++k) proposal[k] = normal(rng, state[k], scale[k]);
    // The uniform draw is consumed on every step so the stream position does
    // not depend on whether the proposal left the box.
    const double u = uniform01(rng);
    if (!prior.contains(proposal)) return false;
    const double candidate = table.log_likelihood(proposal);
    const double delta = candidate - log_post;
    if (delta >= 0.0 || std::log(u) < delta) {
      state = proposal;
      log_post = candidate;
      return true;
    }
    return false;
  }
};

inline Exponents default_start(const PriorConfig& prior) {
  const double v = std::min(1.0, prior.r_max / 2.0);
  return {v, v, v};
}

inline PosteriorDraws run_chain_impl(const LogRatioTable& table, const PriorConfig& prior,
                                     const ChainConfig& cfg, int chain_id, bool overdispersed) {
  if (table.empty()) throw std::invalid_argument("run_chain: empty dataset");
  if (!(prior.r_max > 0.0) || !std::isfinite(prior.r_max))
    throw std::invalid_argument("run_chain: r_max must be positive");
  cfg.validate();

  Rng rng{cfg.seed};
  Exponents start = cfg.initial.value_or(default_start(prior));
  if (overdispersed)
    for (auto& v : start) v = prior.r_max * uniform01(rng);
  for (auto& v : start) v = std::clamp(v, 0.0, prior.r_max);

  Walker walker{table, prior, start};
  Exponents scale = cfg.proposal_std;
  for (std::size_t round = 0; round < cfg.tune_rounds; ++round) {
    std::size_t acc = 0;
    for (std::size_t i = 0; i < cfg.tune_iterations; ++i) acc += walker.step(scale, rng) ? 1 : 0;
    const double rate = static_cast<double>(acc) / static_cast<double>(cfg.tune_iterations);
    const double factor = std::clamp(rate / cfg.target_acceptance, 0.25, 4.0);
    for (auto& s : scale) s = std::min(s * factor, prior.r_max);
  }

  PosteriorDraws out;
  out.chain_id = chain_id;
  out.start = start;
  out.proposal_std = scale;
  const std::size_t kept = (cfg.n_iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  out.draws.reserve(kept);
  out.iterations.reserve(kept);
  for (std::size_t i = 0; i < cfg.n_iterations; ++i) {
    out.accepted += walker.step(scale, rng) ? 1 : 0;
    if (i >= cfg.burn_in && (i - cfg.burn_in) % cfg.thin == 0) {
      out.draws.push_back(walker.state);
      out.iterations.push_back(i);
    }
  }
  out.proposed = cfg.n_iterations;
  out.acceptance_rate = static_cast<double>(out.accepted) / static_cast<double>(out.proposed);
  if (out.draws.empty()) throw std::runtime_error("run_chain: no draws retained after thinning");
  return out;
}

}  // namespace detail

inline PosteriorDraws run_chain(const LogRatioTable& table, const PriorConfig& prior,
                                const ChainConfig& cfg) {
  return detail::run_chain_impl(table, prior, cfg, 0, false);
}

inline PosteriorDraws run_chain(const std::vector<GameRecord>& games, const PriorConfig& prior,
                                const ChainConfig& cfg) {
  if (games.empty()) throw std::invalid_argument("run_chain: empty dataset");
  return run_chain(LogRatioTable{games}, prior, cfg);
}

// Seed of chain `index` under a base configuration.
inline std::uint64_t chain_seed(std::uint64_t base_seed, std::size_t index) {
  return derive_seed(base_seed, index);
}

// Independent chains. Chain 0 starts at the configured (or default) point;
// later chains start from uniform draws over the prior box.
inline std::vector<PosteriorDraws> run_chains(const LogRatioTable& table, const PriorConfig& prior,
                                              const ChainConfig& base_cfg, std::size_t n_chains,
                                              std::size_t threads = 1) {
  if (n_chains == 0) throw std::invalid_argument("run_chains: n_chains must be at least 1");
  base_cfg.validate();
  std::vector<PosteriorDraws> chains(n_chains);
  parallel_for(n_chains, threads, [&](std::size_t k) {
    ChainConfig cfg = base_cfg;
    cfg.seed = chain_seed(base_cfg.seed, k);
    chains[k] = detail::run_chain_impl(table, prior, cfg, static_cast<int>(k), k > 0);
  });
  return chains;
}

inline std::vector<PosteriorDraws> run_chains(const std::vector<GameRecord>& games,
                                              const PriorConfig& prior,
                                              const ChainConfig& base_cfg, std::size_t n_chains,
                                              std::size_t threads = 1) {
  if (games.empty()) throw std::invalid_argument("run_chains: empty dataset");
  return run_chains(LogRatioTable{games}, prior, base_cfg, n_chains, threads);
}

// Potential scale reduction sqrt(V / W) with V = W + B / n, where W is the
// mean within-sequence variance and B / n the variance of sequence means.
// A single sequence is split into halves first. Returns 1 when every value
// in every sequence is identical, +inf when sequences are internally
// constant but disagree.
inline double compute_rhat(const std::vector<std::vector<double>>& sequences) {
  std::vector<std::vector<double>> seqs;
  if (sequences.size() == 1) {
    const auto& s = sequences.front();
    if (s.size() < 4) throw std::invalid_argument("compute_rhat: sequence shorter than 4");
    const std::size_t half = s.size() / 2;
    seqs.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(half));
    seqs.emplace_back(s.end() - static_cast<std::ptrdiff_t>(half), s.end());
  } else {
    seqs = sequences;
  }
  if (seqs.size() < 2) throw std::invalid_argument("compute_rhat: need at least one sequence");
  const std::size_t n = seqs.front().size();
  for (const auto& s : seqs) {
    if (s.size() != n) throw std::invalid_argument("compute_rhat: sequences differ in length");
    if (n < 2) throw std::invalid_argument("compute_rhat: sequences too short");
  }
  if (sequences.size() > 1 && n < 4) throw std::invalid_argument("compute_rhat: sequence shorter than 4");

  const double first = seqs.front().front();
  const bool all_same = std::all_of(seqs.begin(), seqs.end(), [&](const auto& s) {
    return std::all_of(s.begin(), s.end(), [&](double v) { return v == first; });
  });
  if (all_same) return 1.0;

  std::vector<double> means, vars;
  for (const auto& s : seqs) {
    means.push_back(stats::mean(s));
    vars.push_back(stats::variance(s));
  }
  const double w = stats::mean(vars);
  const double b_over_n = stats::variance(means);
  if (w <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt((w + b_over_n) / w);
}

// Split R-hat per exponent: each chain is cut into halves (a trailing odd
// draw is dropped) before pooling.
inline Exponents split_rhat(const std::vector<PosteriorDraws>& chains) {
  if (chains.empty()) throw std::invalid_argument("split_rhat: no chains");
  std::size_t len = chains.front().draws.size();
  for (const auto& c : chains) len = std::min(len, c.draws.size());
  const std::size_t half = len / 2;
  if (half < 2) throw std::invalid_argument("split_rhat: chains too short");
  Exponents out{};
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<std::vector<double>> seqs;
    for (const auto& c : chains) {
      const auto col = c.column(p);
      seqs.emplace_back(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(half));
      seqs.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(half),
                        col.begin() + static_cast<std::ptrdiff_t>(2 * half));
    }
    out[p] = compute_rhat(seqs);
  }
  return out;
}

// Effective sample size per exponent, summed over chains.
inline Exponents effective_sample_size(const std::vector<PosteriorDraws>& chains) {
  Exponents out{};
  for (const auto& c : chains)
    for (std::size_t p = 0; p < 3; ++p) out[p] += stats::effective_sample_size(c.column(p));
  return out;
}

inline Exponents posterior_mean(const std::vector<PosteriorDraws>& chains) {
  Exponents sum{};
  std::size_t n = 0;
  for (const auto& c : chains) {
    for (const auto& d : c.draws)
      for (std::size_t p = 0; p < 3; ++p) sum[p] += d[p];
    n += c.draws.size();
  }
  if (n == 0) throw std::invalid_argument("posterior_mean: no draws");
  for (auto& s : sum) s /= static_cast<double>(n);
  return sum;
}

// Pools retained draws of all chains in chain order.
inline std::vector<Exponents> pool_draws(const std::vector<PosteriorDraws>& chains) {
  std::vector<Exponents> out;
  for (const auto& c : chains) out.insert(out.end(), c.draws.begin(), c.draws.end());
  return out;
}

// Warnings for exponents whose posterior mean sits within 2% of r_max.
inline std::vector<std::string> boundary_warnings(const Exponents& means, const PriorConfig& prior) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < 3; ++p) {
    if (means[p] >= 0.98 * prior.r_max)
      out.push_back("r" + std::to_string(p + 1) + " posterior mean " + csv::format_double(means[p]) +
                    " is within 2% of r_max; consider widening the prior");
  }
  return out;
}

struct ParamSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

struct TraceRow {
  std::size_t iteration = 0;
  Exponents values{};
};

struct TraceTable {
  std::vector<TraceRow> rows;
  std::array<ParamSummary, 3> summary{};
};

inline ParamSummary summarize_column(const std::vector<double>& col) {
  ParamSummary s;
  s.mean = stats::mean(col);
  s.sd = col.size() > 1 ? stats::stddev(col) : 0.0;
  s.q05 = stats::quantile_nearest_rank(col, 0.05);
  s.q95 = stats::quantile_nearest_rank(col, 0.95);
  return s;
}

inline TraceTable export_trace(const PosteriorDraws& draws) {
  if (draws.draws.empty()) throw std::invalid_argument("export_trace: no draws");
  TraceTable t;
  t.rows.reserve(draws.draws.size());
  for (std::size_t i = 0; i < draws.draws.size(); ++i) {
    const std::size_t it = i < draws.iterations.size() ? draws.iterations[i] : i;
    t.rows.push_back({it, draws.draws[i]});
  }
  for (std::size_t p = 0; p < 3; ++p) t.summary[p] = summarize_column(draws.column(p));
  return t;
}

inline void write_trace_csv(std::ostream& os, const TraceTable& t) {
  os << "iteration,r1,r2,r3\n";
  for (const auto& r : t.rows)
    os << r.iteration << ',' << csv::format_double(r.values[0]) << ','
       << csv::format_double(r.values[1]) << ',' << csv::format_double(r.values[2]) << '\n';
}

}  // namespace seasonsim
