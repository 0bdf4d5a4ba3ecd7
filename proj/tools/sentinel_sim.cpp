#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "sentinel/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sentinel / PEAS sleep-scheduling simulator"};

  std::string config_path;
  sentinel::cli::Overrides overrides;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  app.add_option("--config", config_path, "experiment file (key = value)")->check(CLI::ExistingFile);
  app.add_option("--protocol", overrides.protocol, "sentinel or peas")
      ->check(CLI::IsMember({"sentinel", "peas"}));
  app.add_option("--seed", overrides.seed, "base random seed");
  app.add_option("--duration", overrides.duration, "simulated seconds");
  app.add_option("--nodes", overrides.nodes, "number of deployed nodes");
  app.add_option("--output", overrides.output, "output directory");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  sentinel::cli::ExperimentSpec spec;
  try {
    if (!config_path.empty()) spec = sentinel::cli::load_config(config_path);
    sentinel::cli::apply_overrides(spec, overrides);
  } catch (const sentinel::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    return sentinel::cli::run_experiment(spec, jobs, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
