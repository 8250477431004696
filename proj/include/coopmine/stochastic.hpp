#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coopmine/model.hpp"

namespace coopmine {

/// Identical-profile players: `registered` of them belong to U, `present` are
/// connected at the starting state.
struct ClassSpec {
  PlayerSpec profile;
  std::size_t registered = 0;
  std::size_t present = 0;
};

/// Arrival/departure process over per-class present counts. States are
/// mixed-radix encoded with class 0 as the fastest digit.
class ClassChain {
 public:
  ClassChain(std::vector<ClassSpec> classes, double beta, std::size_t state_cap = 1'000'000);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_classes() const { return classes_.size(); }
  const std::vector<ClassSpec>& classes() const { return classes_; }
  double beta() const { return beta_; }

  std::size_t count(std::size_t state, std::size_t cls) const {
    return (state / stride_[cls]) % (classes_[cls].registered + 1);
  }
  std::vector<std::size_t> counts(std::size_t state) const;
  std::size_t index(std::span<const std::size_t> counts) const;
  std::size_t up(std::size_t state, std::size_t cls) const { return state + stride_[cls]; }
  std::size_t down(std::size_t state, std::size_t cls) const { return state - stride_[cls]; }
  std::size_t initial_state() const;

  double arrival_rate(std::size_t state, std::size_t cls) const {
    return static_cast<double>(classes_[cls].registered - count(state, cls)) * classes_[cls].profile.lambda;
  }
  double departure_rate(std::size_t state, std::size_t cls) const {
    return static_cast<double>(count(state, cls)) * classes_[cls].profile.mu;
  }
  /// D = β + Σ arrivals + Σ departures.
  double total_rate(std::size_t state) const;

 private:
  std::vector<ClassSpec> classes_;
  std::vector<std::size_t> stride_;
  std::size_t num_states_ = 1;
  double beta_;
};

ClassChain build_chain(std::vector<ClassSpec> classes, const GameEnv& env,
                       std::size_t state_cap = 1'000'000);

/// Per-state investments of every class member plus the aggregate ψ.
struct StateStrategy {
  std::size_t num_classes = 0;
  std::vector<double> psi;
  std::vector<double> investment;  // [state * num_classes + cls]

  double x(std::size_t state, std::size_t cls) const { return investment[state * num_classes + cls]; }
};

/// Markov-perfect strategy: in every state the equilibrium over the admitted
/// active set of present players.
StateStrategy mpe_strategy(const ClassChain& chain, const GameEnv& env);

/// Expected utility and cost of a focal player, per state, for the focal being
/// present and absent. Entries where the focal cannot be in that position are NaN.
struct FocalValues {
  std::vector<double> present_utility;
  std::vector<double> present_cost;
  std::vector<double> absent_utility;
  std::vector<double> absent_cost;

  double present_reward(std::size_t state) const { return present_utility[state] + present_cost[state]; }
};

struct UtilityTable {
  std::vector<FocalValues> by_class;
};

/// Solves the recursive expected-utility system for a focal member of `cls`.
FocalValues class_values(const ClassChain& chain, const StateStrategy& strategy,
                         const GameEnv& env, std::size_t cls);

UtilityTable expected_utilities(const ClassChain& chain, const StateStrategy& strategy,
                                const GameEnv& env);

/// A focal outside the strategic classes investing a constant amount while
/// present (its power is already part of env.l); it connects and disconnects
/// at its own λ, μ.
FocalValues fixed_investment_values(const ClassChain& chain, const StateStrategy& strategy,
                                    const GameEnv& env, const PlayerSpec& focal, double investment);

/// Raised when the connect/disconnect process has absorbing states.
class ReducibleChainError : public NumericError {
 public:
  ReducibleChainError(const std::string& what, std::vector<std::size_t> absorbing_counts)
      : NumericError(what), absorbing_counts_(std::move(absorbing_counts)) {}
  /// Per-class count the process is absorbed into.
  const std::vector<std::size_t>& absorbing_counts() const { return absorbing_counts_; }

 private:
  std::vector<std::size_t> absorbing_counts_;
};

/// Long-run occupancy of the arrival/departure process (β excluded).
std::vector<double> stationary_distribution(const ClassChain& chain);

}  // namespace coopmine
