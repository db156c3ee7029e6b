#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "pointhole/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace pointhole::cli;
  CLI::App app{"Point interactions as limits of small holes with singular Robin conditions"};
  std::string command, config_path, out_dir;
  int jobs = 1;
  std::uint64_t seed = 1;
  app.add_option("command", command, "subcommand")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "experiment configuration (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized diagnostics");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  RunContext ctx;
  try {
    ctx.cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return exit_config;
  }
  if (!out_dir.empty()) ctx.cfg.output.dir = out_dir;
  ctx.out = ctx.cfg.output.dir;
  ctx.jobs = jobs;
  ctx.seed = seed;
  return run_command(command, ctx);
}
