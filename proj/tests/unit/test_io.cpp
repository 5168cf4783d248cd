#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sbport/io.hpp"
#include "support/generators.hpp"

using namespace sbport;

TEST_CASE("Ising problem round trip") {
  std::mt19937_64 rng(1);
  const auto p = testing::random_ising(5, rng);
  const auto q = ising_from_json(Json::parse(to_json(p).dump()));
  CHECK(std::equal(p.couplings().begin(), p.couplings().end(), q.couplings().begin()));
  CHECK(std::equal(p.field().begin(), p.field().end(), q.field().begin()));
  CHECK_THROWS_AS(ising_from_json(Json{{"n", 2}, {"J", {0.0}}}), std::invalid_argument);
}

TEST_CASE("scenario round trip") {
  MarketConfig c;
  c.horizon = 2;
  c.seed = 3;
  const auto s = generate_scenario(c);
  const auto back = scenario_from_json(Json::parse(to_json(s).dump()));
  CHECK(back.horizon() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(std::equal(s.mu(t).begin(), s.mu(t).end(), back.mu(t).begin()));
    CHECK(std::equal(s.sigma(t).begin(), s.sigma(t).end(), back.sigma(t).begin()));
  }
  Json bad = to_json(s);
  bad["horizon"] = 3;
  CHECK_THROWS_AS(scenario_from_json(bad), std::invalid_argument);
}

TEST_CASE("parameter structs round trip and keep defaults") {
  SBParams p;
  p.detuning = {0.5, 1.0};
  p.xi0 = 0.3;
  p.seed = 99;
  const auto q = sb_params_from_json(Json::parse(to_json(p).dump()));
  CHECK(q.detuning == p.detuning);
  CHECK(q.xi0 == p.xi0);
  CHECK(q.seed == 99);

  const auto partial = sb_params_from_json(Json{{"p_max", 2.0}, {"detuning", 1.5}});
  CHECK(partial.p_max == 2.0);
  CHECK(partial.detuning == std::vector<double>{1.5});
  CHECK(partial.dt == SBParams{}.dt);
  CHECK_FALSE(partial.xi0.has_value());
  CHECK_FALSE(sb_params_from_json(Json{{"xi0", nullptr}}, q).xi0.has_value());

  PortfolioSpec spec;
  spec.gamma = 2.5;
  spec.unit_cap = 7;
  spec.trade_cost_schedule = std::vector<double>{0.1, 0.2};
  const auto spec2 = spec_from_json(to_json(spec));
  CHECK(spec2.gamma == 2.5);
  CHECK(spec2.unit_cap == 7);
  CHECK(spec2.trade_cost_schedule == spec.trade_cost_schedule);

  MarketConfig m;
  m.risk_free_return = 0.01;
  m.seasonal_amplitude = 0.02;
  const auto m2 = market_config_from_json(to_json(m));
  CHECK(m2.risk_free_return == m.risk_free_return);
  CHECK(m2.seasonal_amplitude == 0.02);
  CHECK_FALSE(market_config_from_json(Json{{"risk_free_return", nullptr}}, m).risk_free_return);
}

TEST_CASE("json files") {
  const auto dir = std::filesystem::temp_directory_path() / "sbport_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.json";
  write_json_file(path, Json{{"a", 1.5}});
  CHECK(read_json_file(path).at("a").get<double>() == 1.5);
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), std::runtime_error);
  {
    std::ofstream(dir / "broken.json") << "{ not json";
  }
  CHECK_THROWS_AS(read_json_file(dir / "broken.json"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("doubles format in shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1e-20) == "-1e-20");
  for (double v : {0.1 + 0.2, 1.0 / 3.0, 6.02214076e23}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("csv writer") {
  std::ostringstream out;
  CsvWriter csv(out, {"a", "b", "c"});
  csv.cell(1.5).cell(2LL).cell("x");
  csv.end_row();
  CHECK(out.str() == "a,b,c\n1.5,2,x\n");
  csv.cell(1.0);
  CHECK_THROWS_AS(csv.end_row(), std::logic_error);
}
