#include "sbport/cli/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace sbport::cli {

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 6> kCommands{{
    {Command::kSweepGamma, "sweep-gamma"},
    {Command::kTrajectory, "trajectory"},
    {Command::kVerify, "verify"},
    {Command::kBenchmark, "benchmark"},
    {Command::kTrace, "trace"},
    {Command::kGenerateMarket, "generate-market"},
}};

constexpr std::array<std::string_view, 15> kTopLevelKeys{
    "description", "market", "scenario_file", "spec",  "sb",     "seed",   "restarts",  "threads",
    "out",         "timing", "gammas",        "trade_costs", "cloud", "verify", "benchmark"};

void reject_unknown(const Json& j, std::span<const std::string_view> known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
T parse_number(std::string_view text, const char* name) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw std::invalid_argument(std::string(name) + ": not a valid number: '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text, const char* name) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw std::invalid_argument(std::string(name) + ": expected 0/1 or true/false, got '" + std::string(text) + "'");
}

RunConfig parse(const Json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, kTopLevelKeys, "config");
  RunConfig c;
  if (j.contains("market")) c.market = market_config_from_json(j.at("market"));
  if (j.contains("scenario_file")) {
    std::filesystem::path p = j.at("scenario_file").get<std::string>();
    c.scenario_file = p.is_relative() ? base_dir / p : p;
  }
  if (j.contains("spec")) c.spec = spec_from_json(j.at("spec"));
  if (j.contains("sb")) c.sb = sb_params_from_json(j.at("sb"));
  if (j.contains("seed")) {
    const auto seed = j.at("seed").get<std::uint64_t>();
    c.market.seed = seed;
    c.sb.seed = seed;
  }
  if (j.contains("restarts")) c.restarts = j.at("restarts").get<std::size_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.contains("timing")) c.timing = j.at("timing").get<bool>();
  if (j.contains("gammas")) c.gammas = j.at("gammas").get<std::vector<double>>();
  if (j.contains("trade_costs")) c.trade_costs = j.at("trade_costs").get<std::vector<double>>();
  if (j.contains("cloud")) c.cloud = j.at("cloud").get<std::size_t>();
  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    constexpr std::array<std::string_view, 2> keys{"mode", "scenarios"};
    reject_unknown(v, keys, "verify");
    if (v.contains("mode")) {
      const auto mode = v.at("mode").get<std::string>();
      if (mode == "exhaustive") {
        c.verify_mode = VerifyMode::kExhaustive;
      } else if (mode == "c-sweep") {
        c.verify_mode = VerifyMode::kTradeCostSweep;
      } else {
        throw std::invalid_argument("verify.mode: expected 'exhaustive' or 'c-sweep', got '" + mode + "'");
      }
    }
    if (v.contains("scenarios")) c.scenarios = v.at("scenarios").get<std::size_t>();
  }
  if (j.contains("benchmark")) {
    const auto& b = j.at("benchmark");
    constexpr std::array<std::string_view, 2> keys{"sizes", "repeats"};
    reject_unknown(b, keys, "benchmark");
    if (b.contains("sizes")) {
      for (const auto& row : b.at("sizes")) {
        if (!row.is_array() || row.size() != 2) throw std::invalid_argument("benchmark.sizes: expected [N, cap] pairs");
        c.sizes.push_back({row.at(0).get<std::size_t>(), row.at(1).get<int>()});
      }
    }
    if (b.contains("repeats")) c.repeats = b.at("repeats").get<std::size_t>();
  }
  return c;
}

}  // namespace

Command parse_command(std::string_view name) {
  for (const auto& [cmd, text] : kCommands) {
    if (text == name) return cmd;
  }
  throw std::invalid_argument("unknown command '" + std::string(name) + "'");
}

std::string_view command_name(Command command) {
  for (const auto& [cmd, text] : kCommands) {
    if (cmd == command) return text;
  }
  throw std::logic_error("unnamed command");
}

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& entry : kCommands) out.emplace_back(entry.second);
  return out;
}

RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  try {
    return parse(j, base_dir);
  } catch (const Json::exception& e) {
    // Wrong JSON types surface as library exceptions; report them as bad input.
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

Json to_json(const RunConfig& c) {
  Json j{{"market", to_json(c.market)},
         {"spec", to_json(c.spec)},
         {"sb", to_json(c.sb)},
         {"restarts", c.restarts},
         {"threads", c.threads},
         {"out", c.out.generic_string()},
         {"timing", c.timing},
         {"gammas", c.gammas},
         {"trade_costs", c.trade_costs},
         {"cloud", c.cloud},
         {"verify",
          {{"mode", c.verify_mode == VerifyMode::kExhaustive ? "exhaustive" : "c-sweep"},
           {"scenarios", c.scenarios}}}};
  if (c.scenario_file) j["scenario_file"] = c.scenario_file->generic_string();
  Json sizes = Json::array();
  for (const auto& s : c.sizes) sizes.push_back({s.n_assets, s.unit_cap});
  j["benchmark"] = {{"sizes", std::move(sizes)}, {"repeats", c.repeats}};
  return j;
}

Overrides overrides_from_env(const std::function<const char*(const char*)>& lookup) {
  const auto get = [&](const char* name) -> const char* {
    return lookup ? lookup(name) : std::getenv(name);
  };
  Overrides o;
  if (const char* v = get("SBPORT_SEED")) o.seed = parse_number<std::uint64_t>(v, "SBPORT_SEED");
  if (const char* v = get("SBPORT_RESTARTS")) o.restarts = parse_number<std::size_t>(v, "SBPORT_RESTARTS");
  if (const char* v = get("SBPORT_THREADS")) o.threads = parse_number<unsigned>(v, "SBPORT_THREADS");
  if (const char* v = get("SBPORT_OUT")) o.out = std::filesystem::path(v);
  if (const char* v = get("SBPORT_TIMING")) o.timing = parse_bool(v, "SBPORT_TIMING");
  return o;
}

void apply(RunConfig& config, const Overrides& o) {
  if (o.seed) {
    config.market.seed = *o.seed;
    config.sb.seed = *o.seed;
  }
  if (o.restarts) config.restarts = *o.restarts;
  if (o.threads) config.threads = *o.threads;
  if (o.out) config.out = *o.out;
  if (o.timing) config.timing = *o.timing;
}

void validate(const RunConfig& c) {
  if (c.restarts == 0) throw std::invalid_argument("restarts must be at least 1");
  if (c.threads == 0) throw std::invalid_argument("threads must be at least 1");
  if (c.out.empty()) throw std::invalid_argument("out directory must not be empty");
  if (c.scenarios == 0) throw std::invalid_argument("verify.scenarios must be at least 1");
  if (c.repeats == 0) throw std::invalid_argument("benchmark.repeats must be at least 1");
  if (c.scenario_file && c.scenarios > 1) {
    throw std::invalid_argument("verify.scenarios > 1 needs a generated market, not a scenario_file");
  }
  for (const auto& s : c.sizes) {
    if (s.n_assets == 0) throw std::invalid_argument("benchmark.sizes: N must be positive");
  }
  validate(c.market);
}

RunConfig load_config(const std::optional<std::filesystem::path>& path, const Overrides& env,
                      const Overrides& flags) {
  RunConfig c;
  if (path) c = config_from_json(read_json_file(*path), path->parent_path());
  apply(c, env);
  apply(c, flags);
  validate(c);
  return c;
}

}  // namespace sbport::cli
