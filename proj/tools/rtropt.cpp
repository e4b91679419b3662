#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "rtropt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rtropt: manifold trust-region experiment runner"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "execute a config-driven experiment");
  std::string config_path;
  std::string out;
  std::string task;
  std::uint64_t seed = 0;
  run_cmd->add_option("config", config_path, "path to a JSON run config")->required();
  auto* out_opt = run_cmd->add_option("--out", out, "output directory override");
  auto* task_opt =
      run_cmd->add_option("--task", task, "task override (minimize|certify|landscape|fdcheck)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "global seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // argument problems are validation errors
  }

  rtropt::CliOverrides overrides;
  if (*out_opt) overrides.out = out;
  if (*task_opt) overrides.task = task;
  if (*seed_opt) overrides.seed = seed;
  return rtropt::run_config_file(config_path, overrides);
}
