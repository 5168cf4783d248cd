// sbport: command-line driver for the portfolio experiments.
#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "sbport/cli/commands.hpp"
#include "sbport/cli/config.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> restarts;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  bool no_timing = false;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace sbport::cli;

  CLI::App app{"Simulated-bifurcation portfolio and trading-trajectory experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "experiment config (JSON)")->envname("SBPORT_CONFIG");
  app.add_option("--seed", flags.seed, "seed for the market and the solver");
  app.add_option("--restarts", flags.restarts, "SB restarts per solve")->check(CLI::PositiveNumber);
  app.add_option("--threads", flags.threads, "worker threads for restarts and enumeration")->check(CLI::PositiveNumber);
  app.add_option("--out", flags.out, "output directory");
  app.add_flag("--no-timing", flags.no_timing, "write 0 in timing columns for byte-identical output");
  app.footer(
      "Environment: SBPORT_CONFIG, SBPORT_SEED, SBPORT_RESTARTS, SBPORT_THREADS, SBPORT_OUT, SBPORT_TIMING.\n"
      "Precedence: config file < environment < flags.");

  for (const auto& name : command_names()) app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);

  try {
    const Command command = parse_command(app.get_subcommands().front()->get_name());
    Overrides cli;
    cli.seed = flags.seed;
    cli.restarts = flags.restarts;
    cli.threads = flags.threads;
    if (flags.out) cli.out = *flags.out;
    if (flags.no_timing) cli.timing = false;

    std::optional<std::filesystem::path> path;
    if (!flags.config.empty()) path = flags.config;
    const RunConfig config = load_config(path, overrides_from_env(), cli);
    const auto result = run_command(command, config);

    std::cout << result.summary;
    if (!result.summary.empty() && result.summary.back() != '\n') std::cout << '\n';
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sbport: error: " << e.what() << '\n';
    return 1;
  }
}
