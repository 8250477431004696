#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopmine/config.hpp"
#include "coopmine/scenario.hpp"
#include "coopmine/simulate.hpp"

namespace coopmine {

constexpr double kMinutesPerYear = 525'600.0;

/// Canonical CSV number: 12 significant digits.
std::string format_number(double v);

/// kWh/min sustained for a year, in TWh.
inline double annual_energy_twh(double power) { return power * kMinutesPerYear / 1e9; }

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct RunReport {
  std::vector<std::string> files;
  std::vector<std::string> summary;
};

Network make_network(const RunConfig& config);
SimConfig make_sim_config(const RunConfig& config, std::uint64_t seed);

struct SweepRow {
  double value = 0.0;
  std::vector<double> metrics;  // in SweepSpec::metrics order, NaN on failure
  std::string status;           // "ok" or the error
};

std::vector<SweepRow> run_sweep(const RunConfig& config);

/// Solves the configured scenario, writes its CSVs under out_dir and returns
/// the summary lines. Module errors propagate.
RunReport run_scenario(const RunConfig& config, const RunOptions& options);

}  // namespace coopmine
