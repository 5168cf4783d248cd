// Independent reference solvers used to certify simulated-bifurcation results.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sbport/portfolio.hpp"
#include "sbport/sb_solver.hpp"

namespace sbport {

/// Largest N*B*T accepted by enumerate_best_trajectory.
inline constexpr std::size_t kMaxTrajectorySpins = 26;
/// Sorted value lists are only kept up to this many entries.
inline constexpr std::size_t kMaxSortedValues = std::size_t{1} << 20;

struct EnumerationResult {
  TrajectorySolution best;
  SpinVector spins;
  std::uint64_t evaluated = 0;
  std::vector<double> sorted_values;  ///< ascending; empty unless requested
};

/**
 * Maximizes the trajectory value over every spin configuration of the layout.
 *
 * Walks a Gray code in spin space and updates the value from the integer
 * holdings directly (return, Sigma_t w_t and bit-level trading cost), so the
 * Ising encoding is not on this path. Ties resolve to the lexicographically
 * smallest spin vector. Work is split into fixed blocks over `threads`.
 */
EnumerationResult enumerate_best_trajectory(const MarketScenario& scenario, const PortfolioSpec& spec,
                                            bool keep_values = false, unsigned threads = 1);

/// Largest per-period holding count (cap+1)^N accepted by optimize_trajectory_dp.
inline constexpr std::size_t kMaxDpStates = std::size_t{1} << 12;

/**
 * Exact trajectory maximizer by dynamic programming over the per-period
 * holdings. The objective couples only neighbouring periods, so this scales
 * linearly in the horizon and handles horizons far beyond enumeration.
 * Ties keep the smallest holdings index.
 */
TrajectorySolution optimize_trajectory_dp(const MarketScenario& scenario, const PortfolioSpec& spec);

struct RiskReturn {
  double risk = 0.0;
  double ret = 0.0;
};

/**
 * Uniform integer holdings in [0, cap] at period `t`, followed by the edge
 * cases: all zero, all cap, and cap in a single asset for each asset.
 */
std::vector<RiskReturn> random_portfolios(const MarketScenario& scenario, const PortfolioSpec& spec,
                                          std::size_t count, std::uint64_t seed, std::size_t t = 0);

/// Per-period values of uniformly random trajectories plus the all-zero and all-cap ones.
std::vector<std::vector<double>> random_trajectories(const MarketScenario& scenario,
                                                     const PortfolioSpec& spec, std::size_t count,
                                                     std::uint64_t seed);

enum class LocalMode {
  kExact,      ///< exhaustive per period; throws if N*B is too large
  kHeuristic,  ///< best-of-R simulated bifurcation per period
  kAuto,       ///< exact when possible
};

struct LocalOptimum {
  TrajectorySolution solution;  ///< valued with the PortfolioSpec trading cost
  bool heuristic = false;
};

/**
 * Optimizes each period on its own with zero trading cost, then values the
 * stacked holdings with the requested trading cost.
 */
LocalOptimum per_time_local_optimal(const MarketScenario& scenario, const PortfolioSpec& spec,
                                    LocalMode mode = LocalMode::kAuto, const SBParams& sb = {},
                                    std::size_t restarts = 10, unsigned threads = 1);

}  // namespace sbport
