// Batch experiment driver: one JSON config in, machine-checkable verdicts
// out. See README.md for the experiment catalog and config formats.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nonloc1d/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for 1-d nonlocal linear and semilinear equations"};
  app.name("nonloc1d");

  bool list = false;
  std::string kind, config_path, out_dir;
  app.add_flag("--list", list, "print the experiment catalog and exit");
  app.add_option("kind", kind, "experiment kind (see --list)");
  app.add_option("--config", config_path, "path to the JSON run configuration");
  app.add_option("--out", out_dir, "output directory (created if missing)");

  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& [name, blurb] : nonloc1d::experiment_catalog())
      std::printf("%-15s %s\n", name, blurb);
    return 0;
  }

  try {
    if (config_path.empty())
      throw nonloc1d::ConfigError("missing --config <path>");
    std::ifstream in(config_path);
    if (!in)
      throw nonloc1d::ConfigError("cannot open config file '" + config_path + "'");
    nonloc1d::json raw;
    try {
      raw = nonloc1d::json::parse(in);
    } catch (const std::exception& e) {
      throw nonloc1d::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const auto cfg = nonloc1d::parse_experiment_config(raw, kind, out_dir);
    return nonloc1d::run_experiment(cfg);
  } catch (const nonloc1d::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
