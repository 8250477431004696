#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopmine/dilemma.hpp"
#include "coopmine/model.hpp"
#include "coopmine/pool.hpp"
#include "coopmine/stochastic.hpp"

namespace coopmine {

enum class RunKind { PoolSolve, Protocol, Shares, ScenarioTable, DilemmaSim, Stationary, Sweep };

const char* to_string(RunKind kind);

struct StrategySpec {
  std::string kind;  // fair | all-c | all-d | repeat | constant
  double phi = std::numeric_limits<double>::quiet_NaN();
  double phi_fraction = std::numeric_limits<double>::quiet_NaN();  // of 1/max(g^i − g^{−i})
  double p = std::numeric_limits<double>::quiet_NaN();              // constant only
  std::size_t count = 0;
};

struct DilemmaSpec {
  DilemmaPayoffs payoffs;
  std::size_t iterations = 200;
  double initial_cooperation = 1.0;
  std::size_t runs = 1;
  double error_rate = 0.0;
  std::size_t histogram_bins = 20;
  std::vector<StrategySpec> strategies;
};

struct StationarySpec {
  std::vector<ClassSpec> classes;
  std::optional<std::pair<std::size_t, std::size_t>> window;  // single class only
  std::size_t state_cap = 1'000'000;
};

struct SweepSpec {
  std::string parameter;  // env.<field>, players.*.<c|k|t|z>, pools.*.<t|z>
  std::vector<double> values;
  std::vector<std::string> metrics;
};

struct RunConfig {
  RunKind kind = RunKind::PoolSolve;
  GameEnv env;
  std::vector<PlayerSpec> players;
  std::vector<PoolSpec> pools;
  FixedPointOptions fixed_point;
  ProtocolOptions protocol;
  std::string focus_pool;  // protocol/shares output; empty = first pool
  ShareCostBasis basis = ShareCostBasis::AssignedWork;
  std::optional<std::string> reference;
  std::optional<DilemmaSpec> dilemma;
  std::optional<StationarySpec> stationary;
  std::optional<SweepSpec> sweep;
  std::uint64_t seed = 0;
};

/// JSON with // and /* */ comments. Unknown keys are errors; every problem is
/// reported with its field path. Parse errors carry line and column.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Metric names accepted by sweeps.
const std::vector<std::string>& sweep_metric_names();

}  // namespace coopmine
