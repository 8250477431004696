#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "coopmine/dilemma.hpp"

namespace coopmine {

/// `count` consecutive agents sharing one strategy.
struct StrategyGroup {
  std::shared_ptr<const MemoryOneStrategy> strategy;
  std::size_t count = 0;
};

struct SimConfig {
  DilemmaPayoffs payoffs;
  std::size_t iterations = 1;
  double initial_cooperation = 1.0;
  std::vector<StrategyGroup> groups;  // counts sum to payoffs.n
  std::uint64_t master_seed = 0;
  std::size_t runs = 1;
  double error_rate = 0.0;      // chance an agent flips its intended action
  bool record_profiles = false;  // per-profile visit counts, n ≤ 16 only
};

/// Throws ValidationError naming every bad field.
void validate_sim_config(const SimConfig& config);

struct SimTrajectory {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<double> cooperation;         // row t: profile played at iteration t
  std::vector<double> cumulative_utility;  // per agent, $
  std::vector<std::uint64_t> profile_counts;  // bit i set = agent i cooperates
};

/// Per-run key, a function of (master seed, run index) only.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run);

/// Agent-indexed view of a configuration used by the step kernels.
class SimKernel {
 public:
  SimKernel(const SimConfig& config, std::uint64_t seed);

  std::size_t n() const { return agents_.size(); }
  const MemoryOneStrategy& strategy(std::size_t agent) const { return *agents_[agent]; }
  const DilemmaPayoffs& payoffs() const { return *payoffs_; }
  std::uint64_t seed() const { return seed_; }
  double error_rate() const { return error_rate_; }

  /// Exactly `cooperators` agents cooperate, chosen by a keyed Fisher–Yates.
  std::vector<std::uint8_t> initial_actions(std::size_t cooperators) const;

  /// Whether `agent` cooperates at iteration t+1 having played `own` at t
  /// against j cooperating co-players.
  bool next_action(std::size_t agent, std::size_t t, bool own, std::size_t j) const;

 private:
  const DilemmaPayoffs* payoffs_;
  std::vector<const MemoryOneStrategy*> agents_;
  std::uint64_t seed_;
  double error_rate_;
};

/// One iteration: pays every agent for `actions` and draws `next`. Returns the
/// number of cooperators in `next`. Serial reference and OpenMP versions give
/// bit-identical results.
std::size_t step_serial(const SimKernel& kernel, std::size_t t, std::span<const std::uint8_t> actions,
                        std::size_t cooperators, std::span<std::uint8_t> next,
                        std::span<double> utility);
std::size_t step_parallel(const SimKernel& kernel, std::size_t t, std::span<const std::uint8_t> actions,
                          std::size_t cooperators, std::span<std::uint8_t> next,
                          std::span<double> utility);

enum class StepMode { Serial, Parallel };

SimTrajectory run(const SimConfig& config, std::size_t run_index = 0, StepMode mode = StepMode::Parallel);

struct TrajectorySummary {
  std::vector<double> mean, q10, q50, q90;  // per iteration across runs
  std::vector<std::size_t> final_histogram;  // final degree, equal bins over [0, 1]
};

struct BatchResult {
  std::vector<SimTrajectory> trajectories;
  TrajectorySummary summary;
};

/// Runs in parallel; results do not depend on the thread count.
BatchResult batch(const SimConfig& config, std::size_t histogram_bins = 20);
/// Serial over runs and agents; reference for the parallel batch.
BatchResult batch_serial(const SimConfig& config, std::size_t histogram_bins = 20);

TrajectorySummary summarize(std::span<const SimTrajectory> runs, std::size_t histogram_bins = 20);

/// |mean per-iteration utility of `focal` − that of the co-players on average|.
double fairness_deviation(const SimTrajectory& trajectory, std::size_t focal);

}  // namespace coopmine
