// Experiment configuration for the command-line driver.
//
// One experiment is one JSON file. Top-level keys (all optional):
//   "description": string, ignored
//   "market":      MarketConfig object (see io.hpp)
//   "scenario_file": path to a scenario JSON, relative to the config file;
//                  replaces the generated market
//   "spec":        PortfolioSpec object
//   "sb":          SBParams object
//   "seed":        sets both market.seed and sb.seed
//   "restarts", "threads", "out", "timing"
//   "gammas":      risk-aversion grid (sweep-gamma, trajectory)
//   "trade_costs": trading-cost grid (trajectory, verify c-sweep)
//   "cloud":       number of random portfolios written next to a sweep
//   "verify":      {"mode": "exhaustive" | "c-sweep", "scenarios": int}
//   "benchmark":   {"sizes": [[N, cap], ...], "repeats": int}
// Unknown keys are rejected so that typos do not silently fall back to defaults.
//
// Precedence: defaults < config file < SBPORT_* environment < command-line flags.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sbport/io.hpp"

namespace sbport::cli {

enum class Command { kSweepGamma, kTrajectory, kVerify, kBenchmark, kTrace, kGenerateMarket };

/// Throws std::invalid_argument for an unknown verb.
Command parse_command(std::string_view name);
std::string_view command_name(Command command);
std::vector<std::string> command_names();

enum class VerifyMode { kExhaustive, kTradeCostSweep };

struct BenchmarkSize {
  std::size_t n_assets = 0;
  int unit_cap = 1;
};

struct RunConfig {
  MarketConfig market;
  std::optional<std::filesystem::path> scenario_file;
  PortfolioSpec spec;
  SBParams sb;
  std::size_t restarts = 10;
  unsigned threads = 1;
  std::filesystem::path out = "out";
  bool timing = true;
  std::vector<double> gammas;
  std::vector<double> trade_costs;
  std::size_t cloud = 0;
  VerifyMode verify_mode = VerifyMode::kExhaustive;
  std::size_t scenarios = 1;
  std::vector<BenchmarkSize> sizes;
  std::size_t repeats = 10;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> restarts;
  std::optional<unsigned> threads;
  std::optional<std::filesystem::path> out;
  std::optional<bool> timing;
};

/// Relative scenario_file paths resolve against `base_dir`.
RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const RunConfig& config);

inline constexpr std::string_view kEnvPrefix = "SBPORT_";

/**
 * Reads SBPORT_SEED, SBPORT_RESTARTS, SBPORT_THREADS, SBPORT_OUT and
 * SBPORT_TIMING (0/1, false/true). `lookup` defaults to std::getenv.
 * Throws std::invalid_argument on a malformed value.
 */
Overrides overrides_from_env(const std::function<const char*(const char*)>& lookup = {});

void apply(RunConfig& config, const Overrides& overrides);

/// Throws std::invalid_argument when the combination cannot run.
void validate(const RunConfig& config);

/// File (if any), then environment, then flags; validated.
RunConfig load_config(const std::optional<std::filesystem::path>& path, const Overrides& env,
                      const Overrides& flags);

}  // namespace sbport::cli
