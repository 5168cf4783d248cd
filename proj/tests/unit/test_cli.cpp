#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sbport/cli/commands.hpp"
#include "sbport/cli/config.hpp"

using namespace sbport;
using namespace sbport::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("sbport_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

using Rows = std::vector<std::map<std::string, std::string>>;

Rows read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
  Rows rows;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::map<std::string, std::string> row;
    std::size_t k = 0;
    for (std::string cell; std::getline(ls, cell, ',');) row[header.at(k++)] = cell;
    rows.push_back(std::move(row));
  }
  return rows;
}

double num(const std::string& s) { return std::stod(s); }

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.out = out;
  c.timing = false;
  c.market.n_assets = 3;
  c.market.horizon = 3;
  c.market.drift = 0.005;
  c.market.seed = 4;
  c.spec.unit_cap = 3;
  c.sb.p_max = 2.0;
  c.sb.init_scale = 0.001;
  c.restarts = 4;
  return c;
}

}  // namespace

TEST_CASE("command names") {
  for (const auto& name : command_names()) CHECK(command_name(parse_command(name)) == name);
  CHECK(command_names().size() == 6);
  CHECK_THROWS_AS(parse_command("sweep"), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const Json j = Json::parse(R"({
    "description": "x",
    "market": {"n_assets": 4, "drift": 0.005},
    "spec": {"gamma": 2, "unit_cap": 7},
    "sb": {"p_max": 2, "xi0": 3},
    "seed": 17, "restarts": 3, "threads": 2, "out": "res", "timing": false,
    "gammas": [0, 1], "trade_costs": [0.01], "cloud": 50,
    "verify": {"mode": "c-sweep", "scenarios": 2},
    "benchmark": {"sizes": [[8, 1], [4, 15]], "repeats": 2}
  })");
  const auto c = config_from_json(j);
  CHECK(c.market.n_assets == 4);
  CHECK(c.market.seed == 17);
  CHECK(c.sb.seed == 17);
  CHECK(c.sb.xi0 == 3.0);
  CHECK(c.spec.unit_cap == 7);
  CHECK(c.restarts == 3);
  CHECK(c.threads == 2);
  CHECK(c.out == fs::path("res"));
  CHECK_FALSE(c.timing);
  CHECK(c.gammas == std::vector<double>{0.0, 1.0});
  CHECK(c.cloud == 50);
  CHECK(c.verify_mode == VerifyMode::kTradeCostSweep);
  CHECK(c.scenarios == 2);
  REQUIRE(c.sizes.size() == 2);
  CHECK(c.sizes[1].n_assets == 4);
  CHECK(c.sizes[1].unit_cap == 15);
  CHECK(c.repeats == 2);

  const auto back = config_from_json(to_json(c));
  CHECK(back.gammas == c.gammas);
  CHECK(back.sizes.size() == 2);
  CHECK(back.verify_mode == c.verify_mode);
  CHECK(back.sb.xi0 == c.sb.xi0);

  CHECK(config_from_json(Json{{"scenario_file", "s.json"}}, "/base").scenario_file == fs::path("/base/s.json"));
  CHECK(config_from_json(Json{{"scenario_file", "/abs/s.json"}}, "/base").scenario_file == fs::path("/abs/s.json"));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(Json{{"sepc", Json::object()}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(Json{{"restarts", "ten"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(Json{{"verify", {{"mode", "fast"}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(Json{{"verify", {{"scenario", 2}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(Json{{"benchmark", {{"sizes", {{1, 2, 3}}}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(Json::array()), std::invalid_argument);

  RunConfig c;
  c.restarts = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = {};
  c.threads = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = {};
  c.scenario_file = "x.json";
  c.scenarios = 3;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("environment and flag overrides") {
  std::map<std::string, std::string> env{{"SBPORT_SEED", "9"}, {"SBPORT_RESTARTS", "5"}, {"SBPORT_TIMING", "0"},
                                         {"SBPORT_OUT", "envdir"}};
  const auto lookup = [&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  const auto o = overrides_from_env(lookup);
  CHECK(o.seed == 9u);
  CHECK(o.restarts == 5u);
  CHECK_FALSE(o.threads.has_value());
  CHECK(o.timing == false);

  TempDir dir("overrides");
  const auto path = dir.path / "run.cfg";
  write_json_file(path, Json{{"seed", 1}, {"restarts", 2}, {"threads", 3}, {"out", "filedir"}});
  Overrides flags;
  flags.restarts = 7;
  const auto c = load_config(path, o, flags);
  CHECK(c.market.seed == 9);   // env over file
  CHECK(c.sb.seed == 9);
  CHECK(c.restarts == 7);      // flag over env
  CHECK(c.threads == 3);       // file over default
  CHECK(c.out == fs::path("envdir"));
  CHECK_FALSE(c.timing);

  env["SBPORT_THREADS"] = "two";
  CHECK_THROWS_AS(overrides_from_env(lookup), std::invalid_argument);
  env.erase("SBPORT_THREADS");
  env["SBPORT_TIMING"] = "maybe";
  CHECK_THROWS_AS(overrides_from_env(lookup), std::invalid_argument);
  CHECK_THROWS_AS(load_config(dir.path / "missing.cfg", {}, {}), std::runtime_error);
}

TEST_CASE("generate-market writes a loadable scenario") {
  TempDir dir("market");
  auto c = small_config(dir.path / "m");
  const auto r = cmd_generate_market(c);
  REQUIRE(r.files.size() == 1);
  const auto loaded = scenario_from_json(read_json_file(r.files[0]));
  const auto direct = generate_scenario(c.market);
  CHECK(loaded.horizon() == 3);
  CHECK(std::equal(loaded.mu(2).begin(), loaded.mu(2).end(), direct.mu(2).begin()));

  // And the scenario file can drive another command.
  c.scenario_file = r.files[0];
  c.market.n_assets = 99;
  CHECK(load_scenario(c).n_assets() == 3);
}

TEST_CASE("sweep-gamma frontier") {
  TempDir dir("sweep");
  auto c = small_config(dir.path / "s");
  c.market.n_assets = 5;
  c.market.horizon = 1;
  c.market.drift = 0.0;
  c.market.risk_free_return = 0.01;
  c.market.seed = 3;
  c.spec.unit_cap = 15;
  c.gammas = {0.0, 1.0, 10.0, 1000.0};
  c.cloud = 20;
  cmd_sweep_gamma(c);
  const auto rows = read_csv(c.out / "frontier.csv");
  REQUIRE(rows.size() == 4);
  double best = -1.0;
  for (const auto& row : rows) best = std::max(best, num(row.at("return")));
  CHECK(num(rows[0].at("return")) == best);
  CHECK(num(rows[3].at("risk")) == 0.0);
  CHECK(num(rows[3].at("return")) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(rows[0].at("seconds") == "0");
  CHECK(read_csv(c.out / "cloud.csv").size() == 20 + 5 + 2);
  CHECK(fs::exists(c.out / "run.json"));
}

TEST_CASE("trajectory outputs") {
  TempDir dir("trajectory");
  auto c = small_config(dir.path / "t");
  c.gammas = {0.0, 1e4};
  c.trade_costs = {0.0};
  const auto r = cmd_trajectory(c);
  CHECK(r.files.size() == 6);
  const auto scenario = generate_scenario(c.market);

  const auto greedy = read_csv(c.out / "weights_0.csv");
  REQUIRE(greedy.size() == 9);
  for (const auto& row : greedy) {
    const auto t = std::stoul(row.at("t"));
    const auto i = std::stoul(row.at("asset"));
    CHECK(std::stoi(row.at("weight")) == (scenario.mu(t)[i] > 0.0 ? 3 : 0));
  }
  for (const auto& row : read_csv(c.out / "weights_1.csv")) CHECK(row.at("weight") == "0");

  const auto runs = read_csv(c.out / "runs.csv");
  REQUIRE(runs.size() == 2);
  const auto periods = read_csv(c.out / "periods_0.csv");
  REQUIRE(periods.size() == 3);
  double total = 0.0;
  for (const auto& row : periods) total += num(row.at("value"));
  CHECK(total == doctest::Approx(num(runs[0].at("total"))).epsilon(1e-12));

  c.market.horizon = 1;
  c.out = dir.path / "single";
  CHECK_THROWS_AS(cmd_trajectory(c), std::invalid_argument);
  CHECK_FALSE(fs::exists(c.out));
}

TEST_CASE("fixed seed gives byte-identical outputs") {
  TempDir dir("repro");
  auto c = small_config(dir.path / "a");
  c.trade_costs = {0.001, 0.02};
  c.spec.gamma = 1.0;
  cmd_trajectory(c);
  c.out = dir.path / "b";
  c.threads = 3;
  cmd_trajectory(c);
  for (const auto& name : {"runs.csv", "weights_0.csv", "weights_1.csv", "periods_1.csv"}) {
    CHECK(slurp(dir.path / "a" / name) == slurp(dir.path / "b" / name));
  }
}

TEST_CASE("verify modes") {
  TempDir dir("verify");
  auto c = small_config(dir.path / "v");
  c.market.n_assets = 2;
  c.market.horizon = 2;
  c.spec.gamma = 1.0;
  c.spec.trade_cost = 0.01;
  c.scenarios = 2;
  c.restarts = 10;
  const auto r = cmd_verify(c);
  CHECK(r.summary.find("of 2 scenarios") != std::string::npos);
  const auto rows = read_csv(c.out / "verify.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].at("market_seed") == "5");
  for (const auto& row : rows) {
    CHECK(num(row.at("gap")) >= -1e-12);
    CHECK(std::stoul(row.at("rank")) >= 1);
    CHECK((row.at("match") == "1") == (num(row.at("gap")) <= 1e-9));
    if (row.at("match") == "1") CHECK(row.at("rank") == "1");
  }
  CHECK(read_csv(c.out / "sorted_values.csv").size() == 256);

  c.verify_mode = VerifyMode::kTradeCostSweep;
  c.out = dir.path / "c";
  c.market.horizon = 3;
  c.trade_costs = {0.01, 0.0};
  c.sb.xi0 = 8.0;
  cmd_verify(c);
  const auto sweep = read_csv(c.out / "csweep.csv");
  REQUIRE(sweep.size() == 2);
  CHECK(num(sweep[1].at("exact_value")) == doctest::Approx(num(sweep[1].at("local_value"))).epsilon(1e-12));
  CHECK(num(sweep[0].at("exact_value")) >= num(sweep[0].at("global_value")) - 1e-12);

  c.trade_costs.clear();
  c.out = dir.path / "empty";
  CHECK_THROWS_AS(cmd_verify(c), std::invalid_argument);

  c.verify_mode = VerifyMode::kExhaustive;
  c.market.n_assets = 5;
  c.spec.unit_cap = 15;
  c.out = dir.path / "big";
  CHECK_THROWS_AS(cmd_verify(c), std::invalid_argument);
  CHECK_FALSE(fs::exists(c.out));
}

TEST_CASE("benchmark rows") {
  TempDir dir("bench");
  auto c = small_config(dir.path / "b");
  c.sizes = {{4, 1}, {3, 7}};
  c.repeats = 2;
  c.sb = SBParams{};
  cmd_benchmark(c);
  const auto rows = read_csv(c.out / "benchmark.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].at("spins") == "4");
  CHECK(rows[1].at("spins") == "9");
  CHECK(rows[1].at("mean_seconds") == "0");
  CHECK(rows[1].at("std") == "0");

  c.timing = true;
  c.out = dir.path / "timed";
  cmd_benchmark(c);
  CHECK(num(read_csv(c.out / "benchmark.csv")[0].at("mean_seconds")) > 0.0);
}

TEST_CASE("failures remove partial outputs") {
  TempDir dir("partial");
  auto c = small_config(dir.path / "fresh");
  c.sizes = {{2, 1}, {2, 4}};  // second size has an invalid cap
  CHECK_THROWS_AS(cmd_benchmark(c), std::invalid_argument);
  CHECK_FALSE(fs::exists(c.out));

  // A directory that already existed is kept, with only the new files removed.
  c.out = dir.path / "existing";
  fs::create_directories(c.out);
  std::ofstream(c.out / "keep.txt") << "x";
  CHECK_THROWS_AS(run_command(Command::kBenchmark, c), std::invalid_argument);
  CHECK(fs::exists(c.out / "keep.txt"));
  CHECK_FALSE(fs::exists(c.out / "run.json"));
  CHECK_FALSE(fs::exists(c.out / "benchmark.csv"));
}

TEST_CASE("trace output") {
  TempDir dir("trace");
  auto c = small_config(dir.path / "tr");
  c.spec.gamma = 1.0;
  c.sb.trace_every = 10;
  cmd_trace(c);
  const auto rows = read_csv(c.out / "trace.csv");
  REQUIRE(rows.size() > 20);
  CHECK(rows.front().at("step") == "0");
  CHECK(num(rows.front().at("mean_abs_x")) <= c.sb.init_scale);
  // Once the spins have frozen the objective stops changing.
  const auto& last = rows.back().at("objective");
  for (std::size_t k = rows.size() - rows.size() / 20; k < rows.size(); ++k) CHECK(rows[k].at("objective") == last);
  const double offset = encode(generate_scenario(c.market), c.spec).offset;
  for (const auto& row : rows) {
    CHECK(num(row.at("objective")) == doctest::Approx(-num(row.at("energy")) - offset).epsilon(1e-9));
  }
}
