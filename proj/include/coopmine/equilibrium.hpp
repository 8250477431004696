#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopmine/model.hpp"

namespace coopmine {

struct PlayerOutcome {
  std::string id;
  double x_star = 0.0;    // kWh/min
  double win_prob = 0.0;
  double utility = 0.0;   // $ per block
  double cost = 0.0;      // $ per block
  double reward = 0.0;    // $ per block, utility + cost
};

/// Static (λ = μ = 0) equilibrium over a given active set.
struct EquilibriumSolution {
  double psi = 0.0;  // efficiency-weighted aggregate power
  std::vector<PlayerOutcome> players;
  double nonstrategic_share = 0.0;

  const PlayerOutcome* find(const std::string& id) const;
  double total_power(const GameEnv& env) const;  // Σx* + l
};

/// `count` identical copies of `profile`.
struct PlayerGroup {
  PlayerSpec profile;
  std::size_t count = 1;
};

struct Participation {
  double threshold = 0.0;  // upper bound on c/k
  bool participates = false;
};

struct Investment {
  PlayerSpec player;
  double x = 0.0;
};

struct OracleGrid {
  std::size_t points = 10001;
  double upper = 0.0;  // 0 selects βτ(r+θt)e^{−βzt}/c, beyond which utility is negative
  double tolerance = 1e-8;
};

/// c / (k·(r+θt)e^{−βzt}): the per-player term summed inside ψ.
double cost_weight(const PlayerSpec& p, const GameEnv& env);

/// Positive root of (W/βτ)ψ² − (n−1)ψ − k_l·l = 0 with W the summed cost weights.
double psi_from_sums(double n_active, double weight_sum, const GameEnv& env);

double psi(std::span<const PlayerSpec> active, const GameEnv& env);
double psi(std::span<const PlayerGroup> active, const GameEnv& env);

/// max{ψ(1/k − ψc/(k²βτ(r+θt)e^{−βzt})), 0}
double equilibrium_investment(const PlayerSpec& p, double psi_value, const GameEnv& env);

EquilibriumSolution equilibrium_strategy(std::span<const PlayerSpec> active, const GameEnv& env);

/// active_set followed by equilibrium_strategy; excluded candidates are
/// reported with zero investment, in input order.
EquilibriumSolution solve_game(std::span<const PlayerSpec> candidates, const GameEnv& env);

/// Static expected utility Z_i of investing `x` against `others_power` = Σ_{j≠i} k_j x_j + k_l l.
double static_utility(const PlayerSpec& p, double x, double others_power, const GameEnv& env);

Participation participation_condition(const PlayerSpec& candidate,
                                      std::span<const PlayerSpec> active, const GameEnv& env);

/// Greedy admission in increasing cost-weight order (ties by id); stops at the
/// first candidate whose participation condition fails.
std::vector<PlayerSpec> active_set(std::span<const PlayerSpec> candidates, const GameEnv& env);

/// Same admission rule over groups of identical players. Returns the admitted
/// count per group, in input order.
std::vector<std::size_t> active_group_counts(std::span<const PlayerGroup> groups,
                                             const GameEnv& env);

/// Numeric argmax of Z_i over [0, upper]: coarse grid scan then golden-section
/// refinement. With no competing power at all, returns the smallest positive
/// grid point (any positive investment wins the block).
double best_response_oracle(const PlayerSpec& player, std::span<const Investment> others,
                            const GameEnv& env, const OracleGrid& grid = {});

}  // namespace coopmine
