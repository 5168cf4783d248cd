#include "sbport/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "sbport/market.hpp"
#include "sbport/oracle.hpp"
#include "sbport/portfolio.hpp"
#include "sbport/sb_solver.hpp"

namespace sbport::cli {

namespace {

namespace fs = std::filesystem;

// Files written by one command. Unless commit() is reached they are deleted
// again, together with the output directory if it was created here and is empty.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    created_dir_ = !fs::exists(dir_);
    fs::create_directories(dir_);
  }
  Outputs(const Outputs&) = delete;
  Outputs& operator=(const Outputs&) = delete;
  ~Outputs() {
    if (!committed_) rollback();
  }

  std::ofstream open(const std::string& name) {
    const fs::path p = dir_ / name;
    files_.push_back(p);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return f;
  }

  void close(std::ofstream& f) {
    f.close();
    if (!f) throw std::runtime_error("write failed in " + dir_.string());
  }

  std::vector<fs::path> commit() {
    committed_ = true;
    return files_;
  }

 private:
  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : files_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  fs::path dir_;
  std::vector<fs::path> files_;
  bool created_dir_ = false;
  bool committed_ = false;
};

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

void write_run_json(Outputs& out, const RunConfig& config, Command command) {
  auto f = out.open("run.json");
  Json j = to_json(config);
  j["command"] = std::string(command_name(command));
  f << j.dump(2) << '\n';
  out.close(f);
}

struct Solved {
  TrajectorySolution solution;
  double seconds = 0.0;
  std::uint64_t seed_of_best = 0;
};

Solved solve_portfolio(const MarketScenario& scenario, const PortfolioSpec& spec, const RunConfig& config) {
  const Stopwatch clock(config.timing);
  const auto enc = encode(scenario, spec);
  const auto r = solve_best_of(enc.problem, config.sb, config.restarts, config.threads);
  Solved s;
  s.solution = objective(decode(r.best.spins, enc.layout), scenario, spec);
  s.seconds = clock.seconds();
  s.seed_of_best = r.best_seed;
  return s;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

std::size_t dp_states(std::size_t n_assets, int unit_cap) {
  std::size_t states = 1;
  for (std::size_t i = 0; i < n_assets; ++i) {
    states *= static_cast<std::size_t>(unit_cap) + 1;
    if (states > kMaxDpStates) return states;
  }
  return states;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

MarketScenario load_scenario(const RunConfig& config) {
  if (config.scenario_file) return scenario_from_json(read_json_file(*config.scenario_file));
  return generate_scenario(config.market);
}

CommandResult cmd_sweep_gamma(const RunConfig& config) {
  const auto scenario = load_scenario(config);
  validate(config.spec, scenario);
  const auto gammas = config.gammas.empty() ? std::vector<double>{config.spec.gamma} : config.gammas;

  Outputs out(config.out);
  write_run_json(out, config, Command::kSweepGamma);
  auto f = out.open("frontier.csv");
  CsvWriter csv(f, {"gamma", "risk", "return", "value", "seconds", "seed_of_best"});
  double best_return = 0.0;
  for (double gamma : gammas) {
    PortfolioSpec spec = config.spec;
    spec.gamma = gamma;
    const auto s = solve_portfolio(scenario, spec, config);
    const double ret = sum(s.solution.return_term);
    csv.cell(gamma).cell(sum(s.solution.risk_term)).cell(ret).cell(s.solution.total_value).cell(s.seconds)
        .cell(static_cast<long long>(s.seed_of_best));
    csv.end_row();
    best_return = std::max(best_return, ret);
  }
  out.close(f);

  if (config.cloud > 0) {
    auto g = out.open("cloud.csv");
    CsvWriter cloud(g, {"risk", "return"});
    for (const auto& rr : random_portfolios(scenario, config.spec, config.cloud, config.sb.seed)) {
      cloud.cell(rr.risk).cell(rr.ret);
      cloud.end_row();
    }
    out.close(g);
  }
  return {out.commit(), std::to_string(gammas.size()) + " frontier points, largest return " + fmt(best_return)};
}

CommandResult cmd_trajectory(const RunConfig& config) {
  const auto scenario = load_scenario(config);
  if (scenario.horizon() < 2) throw std::invalid_argument("trajectory: scenario needs at least 2 periods");
  validate(config.spec, scenario);
  const auto gammas = config.gammas.empty() ? std::vector<double>{config.spec.gamma} : config.gammas;
  const auto costs = config.trade_costs.empty() ? std::vector<double>{config.spec.trade_cost} : config.trade_costs;

  Outputs out(config.out);
  write_run_json(out, config, Command::kTrajectory);
  auto f = out.open("runs.csv");
  CsvWriter runs(f, {"run", "gamma", "trade_cost", "return", "risk", "unit_trade_cost", "bit_trade_cost", "total",
                     "unit_changes", "seconds", "seed_of_best"});
  long long run = 0;
  std::ostringstream summary;
  for (double gamma : gammas) {
    for (double c : costs) {
      PortfolioSpec spec = config.spec;
      spec.gamma = gamma;
      spec.trade_cost = c;
      const auto s = solve_portfolio(scenario, spec, config);
      const auto& sol = s.solution;
      const long changes = total_unit_changes(sol.weights);
      runs.cell(run).cell(gamma).cell(c).cell(sum(sol.return_term)).cell(sum(sol.risk_term))
          .cell(sol.unit_trade_cost).cell(sol.bit_trade_cost).cell(sol.total_value)
          .cell(static_cast<long long>(changes)).cell(s.seconds).cell(static_cast<long long>(s.seed_of_best));
      runs.end_row();

      const std::string tag = std::to_string(run);
      auto w = out.open("weights_" + tag + ".csv");
      CsvWriter wcsv(w, {"t", "asset", "weight"});
      for (std::size_t t = 0; t < scenario.horizon(); ++t) {
        for (std::size_t i = 0; i < scenario.n_assets(); ++i) {
          wcsv.cell(static_cast<long long>(t)).cell(static_cast<long long>(i))
              .cell(static_cast<long long>(sol.weights(i, t)));
          wcsv.end_row();
        }
      }
      out.close(w);

      auto p = out.open("periods_" + tag + ".csv");
      CsvWriter pcsv(p, {"t", "value", "return_term", "risk_term"});
      const auto values = period_values(sol, scenario, spec);
      for (std::size_t t = 0; t < scenario.horizon(); ++t) {
        pcsv.cell(static_cast<long long>(t)).cell(values[t]).cell(sol.return_term[t]).cell(sol.risk_term[t]);
        pcsv.end_row();
      }
      out.close(p);

      summary << "run " << run << ": gamma " << fmt(gamma) << ", c " << fmt(c) << ", value "
              << fmt(sol.total_value) << ", unit changes " << changes << '\n';
      ++run;
    }
  }
  out.close(f);
  return {out.commit(), summary.str()};
}

namespace {

CommandResult verify_exhaustive(const RunConfig& config) {
  Outputs out(config.out);
  write_run_json(out, config, Command::kVerify);
  auto f = out.open("verify.csv");
  CsvWriter csv(f, {"scenario", "market_seed", "optimum", "sb_value", "gap", "rank", "match"});
  std::size_t matches = 0;
  for (std::size_t k = 0; k < config.scenarios; ++k) {
    RunConfig local = config;
    local.market.seed = config.market.seed + k;
    const auto scenario = load_scenario(local);
    validate(config.spec, scenario);
    const auto layout = build_layout(scenario, config.spec);
    const bool keep = (std::size_t{1} << std::min<std::size_t>(layout.total_spins(), 63)) <= kMaxSortedValues;
    const auto exact = enumerate_best_trajectory(scenario, config.spec, keep, config.threads);
    const auto s = solve_portfolio(scenario, config.spec, config);

    const double optimum = exact.best.total_value;
    const double gap = optimum - s.solution.total_value;
    const bool match = gap <= 1e-9;
    matches += match;
    csv.cell(static_cast<long long>(k)).cell(static_cast<long long>(local.market.seed)).cell(optimum)
        .cell(s.solution.total_value).cell(gap);
    if (keep) {
      const auto& v = exact.sorted_values;
      const auto above = v.end() - std::upper_bound(v.begin(), v.end(), s.solution.total_value + 1e-9);
      csv.cell(static_cast<long long>(above + 1));
    } else {
      csv.cell("");
    }
    csv.cell(match ? "1" : "0");
    csv.end_row();

    if (k == 0 && keep) {
      auto g = out.open("sorted_values.csv");
      CsvWriter values(g, {"index", "value"});
      for (std::size_t i = 0; i < exact.sorted_values.size(); ++i) {
        values.cell(static_cast<long long>(i)).cell(exact.sorted_values[i]);
        values.end_row();
      }
      out.close(g);
    }
  }
  out.close(f);
  return {out.commit(), "SB matched the exhaustive optimum on " + std::to_string(matches) + " of " +
                            std::to_string(config.scenarios) + " scenarios"};
}

CommandResult verify_trade_cost_sweep(const RunConfig& config) {
  if (config.trade_costs.empty()) throw std::invalid_argument("verify c-sweep: trade_costs is empty");
  const auto scenario = load_scenario(config);
  validate(config.spec, scenario);
  const bool dp_ok = dp_states(scenario.n_assets(), config.spec.unit_cap) <= kMaxDpStates;

  Outputs out(config.out);
  write_run_json(out, config, Command::kVerify);
  auto f = out.open("csweep.csv");
  CsvWriter csv(f, {"c", "global_value", "local_value", "gap", "exact_value"});
  std::ostringstream summary;
  for (double c : config.trade_costs) {
    PortfolioSpec spec = config.spec;
    spec.trade_cost = c;
    const auto global = solve_portfolio(scenario, spec, config).solution.total_value;
    const auto local = per_time_local_optimal(scenario, spec, LocalMode::kAuto, config.sb, config.restarts,
                                              config.threads)
                           .solution.total_value;
    csv.cell(c).cell(global).cell(local).cell(global - local);
    if (dp_ok) {
      csv.cell(optimize_trajectory_dp(scenario, spec).total_value);
    } else {
      csv.cell("");
    }
    csv.end_row();
    summary << "c " << fmt(c) << ": global " << fmt(global) << ", local " << fmt(local) << '\n';
  }
  out.close(f);
  return {out.commit(), summary.str()};
}

}  // namespace

CommandResult cmd_verify(const RunConfig& config) {
  return config.verify_mode == VerifyMode::kExhaustive ? verify_exhaustive(config) : verify_trade_cost_sweep(config);
}

CommandResult cmd_benchmark(const RunConfig& config) {
  if (config.sizes.empty()) throw std::invalid_argument("benchmark: no sizes configured");
  Outputs out(config.out);
  write_run_json(out, config, Command::kBenchmark);
  auto f = out.open("benchmark.csv");
  CsvWriter csv(f, {"N", "cap", "spins", "mean_seconds", "std"});
  std::ostringstream summary;
  for (const auto& size : config.sizes) {
    MarketConfig market = config.market;
    market.n_assets = size.n_assets;
    market.horizon = 1;
    if (market.risk_free_return && market.risk_free_asset >= size.n_assets) market.risk_free_return.reset();
    const auto scenario = generate_scenario(market);
    PortfolioSpec spec = config.spec;
    spec.unit_cap = size.unit_cap;
    validate(spec, scenario);
    const auto enc = encode(scenario, spec);

    // Repetitions run one after another so each timing sees a single core.
    std::vector<double> times;
    for (std::size_t r = 0; r < config.repeats; ++r) {
      SBParams p = config.sb;
      p.seed = config.sb.seed + r;
      p.record_trace = false;
      const Stopwatch clock(config.timing);
      evolve(enc.problem, p);
      times.push_back(clock.seconds());
    }
    const double mean = sum(times) / static_cast<double>(times.size());
    double var = 0.0;
    for (double t : times) var += (t - mean) * (t - mean);
    const double sd = times.size() > 1 ? std::sqrt(var / static_cast<double>(times.size() - 1)) : 0.0;
    csv.cell(static_cast<long long>(size.n_assets)).cell(static_cast<long long>(size.unit_cap))
        .cell(static_cast<long long>(enc.layout.total_spins())).cell(mean).cell(sd);
    csv.end_row();
    summary << "N " << size.n_assets << ", cap " << size.unit_cap << ": " << fmt(mean) << " s\n";
  }
  out.close(f);
  return {out.commit(), summary.str()};
}

CommandResult cmd_trace(const RunConfig& config) {
  const auto scenario = load_scenario(config);
  validate(config.spec, scenario);
  const auto enc = encode(scenario, config.spec);
  SBParams p = config.sb;
  p.record_trace = true;
  const auto r = evolve(enc.problem, p);

  Outputs out(config.out);
  write_run_json(out, config, Command::kTrace);
  auto f = out.open("trace.csv");
  CsvWriter csv(f, {"step", "t", "p", "mean_abs_x", "mean_abs_y", "energy", "objective"});
  for (const auto& s : r.trace) {
    csv.cell(static_cast<long long>(s.step)).cell(s.t).cell(s.p).cell(s.mean_abs_x).cell(s.mean_abs_y)
        .cell(s.energy).cell(-(s.energy + enc.offset));
    csv.end_row();
  }
  out.close(f);
  return {out.commit(), std::to_string(r.trace.size()) + " trace samples, final objective " +
                            fmt(-(r.energy + enc.offset)) + (r.diverged ? " (diverged)" : "")};
}

CommandResult cmd_generate_market(const RunConfig& config) {
  const auto scenario = load_scenario(config);
  Outputs out(config.out);
  auto f = out.open("scenario.json");
  f << to_json(scenario).dump(2) << '\n';
  out.close(f);
  return {out.commit(), "scenario with " + std::to_string(scenario.n_assets()) + " assets and " +
                            std::to_string(scenario.horizon()) + " periods"};
}

CommandResult run_command(Command command, const RunConfig& config) {
  switch (command) {
    case Command::kSweepGamma: return cmd_sweep_gamma(config);
    case Command::kTrajectory: return cmd_trajectory(config);
    case Command::kVerify: return cmd_verify(config);
    case Command::kBenchmark: return cmd_benchmark(config);
    case Command::kTrace: return cmd_trace(config);
    case Command::kGenerateMarket: return cmd_generate_market(config);
  }
  throw std::logic_error("unhandled command");
}

}  // namespace sbport::cli
