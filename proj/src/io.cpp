#include "sbport/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace sbport {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

void require(const Json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw std::invalid_argument(std::string(what) + ": missing key '" + key + "'");
}

}  // namespace

Json to_json(const IsingProblem& problem) {
  return Json{{"n", problem.size()},
              {"J", std::vector<double>(problem.couplings().begin(), problem.couplings().end())},
              {"h", std::vector<double>(problem.field().begin(), problem.field().end())}};
}

IsingProblem ising_from_json(const Json& j) {
  for (const char* key : {"n", "J", "h"}) require(j, key, "IsingProblem");
  return IsingProblem(j.at("n").get<std::size_t>(), j.at("J").get<std::vector<double>>(),
                      j.at("h").get<std::vector<double>>());
}

Json to_json(const MarketScenario& scenario) {
  Json mu = Json::array();
  Json sigma = Json::array();
  for (std::size_t t = 0; t < scenario.horizon(); ++t) {
    mu.push_back(std::vector<double>(scenario.mu(t).begin(), scenario.mu(t).end()));
    sigma.push_back(std::vector<double>(scenario.sigma(t).begin(), scenario.sigma(t).end()));
  }
  return Json{{"n_assets", scenario.n_assets()},
              {"horizon", scenario.horizon()},
              {"mu", std::move(mu)},
              {"sigma", std::move(sigma)}};
}

MarketScenario scenario_from_json(const Json& j) {
  for (const char* key : {"n_assets", "mu", "sigma"}) require(j, key, "MarketScenario");
  auto mu = j.at("mu").get<std::vector<std::vector<double>>>();
  if (j.contains("horizon") && j.at("horizon").get<std::size_t>() != mu.size()) {
    throw std::invalid_argument("MarketScenario: horizon does not match number of mu vectors");
  }
  return MarketScenario(j.at("n_assets").get<std::size_t>(), std::move(mu),
                        j.at("sigma").get<std::vector<std::vector<double>>>());
}

Json to_json(const PortfolioSpec& spec) {
  Json j{{"gamma", spec.gamma}, {"unit_cap", spec.unit_cap}, {"trade_cost", spec.trade_cost}};
  if (spec.trade_cost_schedule) j["trade_cost_schedule"] = *spec.trade_cost_schedule;
  return j;
}

PortfolioSpec spec_from_json(const Json& j, PortfolioSpec defaults) {
  PortfolioSpec s = std::move(defaults);
  s.gamma = get_or(j, "gamma", s.gamma);
  s.unit_cap = get_or(j, "unit_cap", s.unit_cap);
  s.trade_cost = get_or(j, "trade_cost", s.trade_cost);
  if (j.contains("trade_cost_schedule") && !j.at("trade_cost_schedule").is_null()) {
    s.trade_cost_schedule = j.at("trade_cost_schedule").get<std::vector<double>>();
  }
  return s;
}

Json to_json(const SBParams& p) {
  Json j{{"kerr", p.kerr},
         {"pump_step", p.pump_step},
         {"p_max", p.p_max},
         {"dt", p.dt},
         {"init_scale", p.init_scale},
         {"settle_fraction", p.settle_fraction},
         {"seed", p.seed},
         {"record_trace", p.record_trace},
         {"trace_every", p.trace_every}};
  if (p.detuning.size() == 1) {
    j["detuning"] = p.detuning.front();
  } else {
    j["detuning"] = p.detuning;
  }
  j["xi0"] = p.xi0 ? Json(*p.xi0) : Json(nullptr);
  return j;
}

SBParams sb_params_from_json(const Json& j, SBParams defaults) {
  SBParams p = std::move(defaults);
  p.kerr = get_or(j, "kerr", p.kerr);
  if (j.contains("detuning")) {
    const auto& d = j.at("detuning");
    p.detuning = d.is_array() ? d.get<std::vector<double>>() : std::vector<double>{d.get<double>()};
  }
  if (j.contains("xi0")) {
    p.xi0 = j.at("xi0").is_null() ? std::nullopt : std::optional<double>(j.at("xi0").get<double>());
  }
  p.pump_step = get_or(j, "pump_step", p.pump_step);
  p.p_max = get_or(j, "p_max", p.p_max);
  p.dt = get_or(j, "dt", p.dt);
  p.init_scale = get_or(j, "init_scale", p.init_scale);
  p.settle_fraction = get_or(j, "settle_fraction", p.settle_fraction);
  p.seed = get_or(j, "seed", p.seed);
  p.record_trace = get_or(j, "record_trace", p.record_trace);
  p.trace_every = get_or(j, "trace_every", p.trace_every);
  return p;
}

Json to_json(const MarketConfig& c) {
  return Json{{"n_assets", c.n_assets},
              {"horizon", c.horizon},
              {"n_increments", c.n_increments},
              {"drift", c.drift},
              {"volatility", c.volatility},
              {"drift_dispersion", c.drift_dispersion},
              {"correlation", c.correlation},
              {"seasonal_amplitude", c.seasonal_amplitude},
              {"seasonal_period", c.seasonal_period},
              {"risk_free_return", c.risk_free_return ? Json(*c.risk_free_return) : Json(nullptr)},
              {"risk_free_asset", c.risk_free_asset},
              {"seed", c.seed}};
}

MarketConfig market_config_from_json(const Json& j, MarketConfig defaults) {
  MarketConfig c = std::move(defaults);
  c.n_assets = get_or(j, "n_assets", c.n_assets);
  c.horizon = get_or(j, "horizon", c.horizon);
  c.n_increments = get_or(j, "n_increments", c.n_increments);
  c.drift = get_or(j, "drift", c.drift);
  c.volatility = get_or(j, "volatility", c.volatility);
  c.drift_dispersion = get_or(j, "drift_dispersion", c.drift_dispersion);
  c.correlation = get_or(j, "correlation", c.correlation);
  c.seasonal_amplitude = get_or(j, "seasonal_amplitude", c.seasonal_amplitude);
  c.seasonal_period = get_or(j, "seasonal_period", c.seasonal_period);
  if (j.contains("risk_free_return")) {
    const auto& r = j.at("risk_free_return");
    c.risk_free_return = r.is_null() ? std::nullopt : std::optional<double>(r.get<double>());
  }
  c.risk_free_asset = get_or(j, "risk_free_asset", c.risk_free_asset);
  c.seed = get_or(j, "seed", c.seed);
  return c;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::separator() {
  if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) {
    throw std::logic_error("CsvWriter: row has " + std::to_string(in_row_) + " cells, header has " +
                           std::to_string(columns_));
  }
  out_ << '\n';
  in_row_ = 0;
}

}  // namespace sbport
