#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "coopmine/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cooperative mining game solver"};
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--config", config_path, "Scenario configuration (JSON, comments allowed)")->required();
  app.add_option("--out", out_dir, "Output directory for CSV files");
  app.add_option("--seed", seed, "Master seed, overrides the configuration");
  app.add_option("--threads", threads, "Worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  if (threads > 0) omp_set_num_threads(threads);

  try {
    const auto config = coopmine::load_config(config_path);
    coopmine::RunOptions options;
    options.out_dir = out_dir;
    options.seed = seed;
    const auto report = coopmine::run_scenario(config, options);
    for (const auto& line : report.summary) std::cout << line << '\n';
    return 0;
  } catch (const coopmine::ValidationError& e) {
    std::cerr << "validation error:\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << '\n';
    return 1;
  } catch (const coopmine::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
