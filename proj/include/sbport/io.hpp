// JSON (de)serialization of problems, scenarios and parameters, plus CSV helpers.
//
// Schemas (all numbers are JSON doubles, written in shortest round-trip form):
//   IsingProblem   {"n": int, "J": [n*n, row-major], "h": [n]}
//   MarketScenario {"n_assets": int, "horizon": int, "mu": [[N] x T], "sigma": [[N*N] x T]}
//   PortfolioSpec  {"gamma", "unit_cap", "trade_cost", "trade_cost_schedule"?: [N*(T-1)]}
//   SBParams       {"kerr", "detuning": number | [n], "xi0"?: number, "pump_step", "p_max",
//                   "dt", "init_scale", "settle_fraction", "seed", "record_trace", "trace_every"}
//   MarketConfig   {"n_assets", "horizon", "n_increments", "drift", "volatility",
//                   "drift_dispersion", "correlation", "seasonal_amplitude",
//                   "seasonal_period", "risk_free_return"?, "risk_free_asset", "seed"}
// Missing keys in SBParams, PortfolioSpec and MarketConfig fall back to defaults.
#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sbport/ising.hpp"
#include "sbport/market.hpp"
#include "sbport/portfolio.hpp"
#include "sbport/sb_solver.hpp"

namespace sbport {

using Json = nlohmann::json;

Json to_json(const IsingProblem& problem);
IsingProblem ising_from_json(const Json& j);

Json to_json(const MarketScenario& scenario);
MarketScenario scenario_from_json(const Json& j);

Json to_json(const PortfolioSpec& spec);
PortfolioSpec spec_from_json(const Json& j, PortfolioSpec defaults = {});

Json to_json(const SBParams& params);
SBParams sb_params_from_json(const Json& j, SBParams defaults = {});

Json to_json(const MarketConfig& config);
MarketConfig market_config_from_json(const Json& j, MarketConfig defaults = {});

/// Throws std::runtime_error when the file cannot be read or parsed.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Minimal CSV writer: header once, then rows of already formatted cells.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::string_view v);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

}  // namespace sbport
