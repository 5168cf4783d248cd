// Experiment commands. Each writes plot-ready CSV (and a copy of the resolved
// configuration as run.json) into config.out and returns the files it wrote.
//
// Output files:
//   sweep-gamma      frontier.csv  gamma,risk,return,value,seconds,seed_of_best
//                    cloud.csv     risk,return                 (when cloud > 0)
//   trajectory       runs.csv      run,gamma,trade_cost,return,risk,unit_trade_cost,
//                                  bit_trade_cost,total,unit_changes,seconds,seed_of_best
//                    weights_<run>.csv  t,asset,weight
//                    periods_<run>.csv  t,value,return_term,risk_term
//   verify           exhaustive: verify.csv  scenario,market_seed,optimum,sb_value,gap,rank,match
//                                sorted_values.csv  index,value   (first scenario, ascending)
//                    c-sweep:    csweep.csv  c,global_value,local_value,gap,exact_value
//   benchmark        benchmark.csv N,cap,spins,mean_seconds,std
//   trace            trace.csv     step,t,p,mean_abs_x,mean_abs_y,energy,objective
//   generate-market  scenario.json
// With timing disabled every seconds column is written as 0, so outputs for a
// fixed seed are byte-identical across runs.
#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "sbport/cli/config.hpp"

namespace sbport::cli {

struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// Scenario from scenario_file, else generated from config.market.
MarketScenario load_scenario(const RunConfig& config);

CommandResult cmd_sweep_gamma(const RunConfig& config);
CommandResult cmd_trajectory(const RunConfig& config);
CommandResult cmd_verify(const RunConfig& config);
CommandResult cmd_benchmark(const RunConfig& config);
CommandResult cmd_trace(const RunConfig& config);
CommandResult cmd_generate_market(const RunConfig& config);

/// Dispatches to the command. Every command removes the files it wrote (and
/// the output directory, if it created it) when it throws.
CommandResult run_command(Command command, const RunConfig& config);

}  // namespace sbport::cli
