#include "radner/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <thread>

int main(int argc, char **argv) {
  CLI::App app{"Radner equilibrium engine"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::uint64_t seed = 0;

  for (const char *name : {"solve", "verify", "oracle", "simulate"}) {
    CLI::App *sub = app.add_subcommand(name);
    sub->add_option("config", config, "YAML config")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--threads", threads, "worker threads for simulation");
    sub->add_option("--seed", seed, "simulation seed (overrides simulation.seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : radner::kExitConfig;
  }

  radner::CommandOptions opt;
  opt.threads = threads;
  for (const CLI::App *sub : app.get_subcommands()) {
    if (sub->count("--out"))
      opt.out_dir = out_dir;
    if (sub->count("--seed"))
      opt.seed = seed;
    return radner::run_command(sub->get_name(), config, opt, std::cout);
  }
  return radner::kExitConfig;
}
