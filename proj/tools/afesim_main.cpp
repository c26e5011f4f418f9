// afesim: scenario runner for the PPG/fNIRS offset-compensation simulator.
//
//   afesim run <scenario> --out <dir> [--set section.key=value ...] [--seed n]
//   afesim sweep <scenario> --key section.key --values v1,v2,... --out <dir>
//   afesim keys          list every scenario key with its default
//   afesim defaults      print a complete scenario file with default values

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "afesim/runner.hpp"
#include "afesim/scenario_file.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Discrete-time simulator of a PPG/fNIRS front end with dual-loop offset compensation"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "simulate one scenario");
  run_cmd->add_option("scenario", scenario, "scenario file")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->required();
  run_cmd->add_option("--set", overrides, "override section.key=value")->take_all();
  run_cmd->add_option("--seed", seed, "override sim.seed");

  std::string sweep_key;
  std::vector<std::string> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario once per value of one key");
  sweep_cmd->add_option("scenario", scenario, "scenario file")->required();
  sweep_cmd->add_option("--key", sweep_key, "section.key to sweep")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->delimiter(',')->required();
  sweep_cmd->add_option("--out", out_dir, "output directory")->required();
  sweep_cmd->add_option("--set", overrides, "override section.key=value")->take_all();
  sweep_cmd->add_option("--seed", seed, "override sim.seed");

  auto* keys_cmd = app.add_subcommand("keys", "list scenario keys and defaults");
  auto* defaults_cmd = app.add_subcommand("defaults", "print the default scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : afesim::kExitConfig;
  }

  const afesim::RunOptions options{overrides, seed};
  if (*run_cmd) {
    return afesim::run(scenario, out_dir, options, std::cerr);
  }
  if (*sweep_cmd) {
    return afesim::sweep(scenario, sweep_key, sweep_values, out_dir, options, std::cerr);
  }
  if (*keys_cmd) {
    for (const auto& k : afesim::scenario_keys()) {
      std::cout << k.section << '.' << k.key << " = " << k.default_value << "    # " << k.description << '\n';
    }
    return 0;
  }
  if (*defaults_cmd) {
    afesim::SimConfig defaults;
    defaults.sync_references();
    std::cout << afesim::serialize_scenario(defaults);
    return 0;
  }
  return 0;
}
