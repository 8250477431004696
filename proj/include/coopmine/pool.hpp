#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopmine/equilibrium.hpp"
#include "coopmine/model.hpp"

namespace coopmine {

/// A pool and its registered miners. `t` and `z` describe the pool's blocks.
struct PoolSpec {
  std::string id;
  double t = 0.0;
  double z = 0.0;
  std::vector<PlayerSpec> members;
  std::vector<bool> connected;  // parallel to members

  std::vector<PlayerSpec> connected_members() const;
  std::size_t connected_count() const;
};

struct WorkAssignment {
  std::vector<std::string> ids;
  std::vector<double> work;  // kWh/min, parallel to ids
  double total = 0.0;
  double c_p = 0.0;  // Σc_i x_i / Σx_i
  double k_p = 0.0;  // Σk_i x_i / Σx_i

  double work_of(const std::string& id) const;
};

/// Water-filling in increasing c/k order (ties by id): a ratio tier is
/// filled with equal levels, each miner capped at capacity, and the next tier
/// is only used once the current one is saturated.
WorkAssignment distribute_work(std::span<const PlayerSpec> members, double target);

struct FixedPointOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 1000;
  double damping = 0.0;  // weight kept on the previous (c_p, k_p)
};

/// Converged pool sub-game. `players` lists the pool aggregates first (one per
/// pool, same order), then any solo strategic entrants.
struct PoolGame {
  GameEnv env;
  std::vector<PlayerSpec> players;
  EquilibriumSolution solution;
  std::vector<WorkAssignment> assignments;
  std::size_t iterations = 0;

  const PlayerOutcome& pool_outcome(std::size_t pool) const { return solution.players[pool]; }
  double pool_expected_reward(std::size_t pool) const { return solution.players[pool].reward; }
};

PoolGame pool_fixed_point(std::span<const PoolSpec> pools, const GameEnv& env,
                          const FixedPointOptions& options = {},
                          std::span<const PlayerSpec> solo_players = {});

enum class ProtocolRole { Strategic, Nonstrategic, Idle };
const char* to_string(ProtocolRole role);

struct ProtocolOutcome {
  std::string id;
  ProtocolRole role = ProtocolRole::Idle;
  double investment = 0.0;  // at the starting state
  double utility = 0.0;
  double cost = 0.0;
  double roi = 0.0;  // utility / cost
};

struct ProtocolGameResult {
  GameEnv env;  // τ = 1, θ = 0, r = pool reward, l = nonstrategic capacity
  std::size_t strategic_registered = 0;
  std::size_t strategic_connected = 0;
  std::vector<ProtocolOutcome> miners;  // connected miners, member order

  const ProtocolOutcome* find(const std::string& id) const;
};

struct ProtocolOptions {
  std::size_t state_cap = 1'000'000;
};

/// Simulated intra-pool competition for `pool_reward`, used only to rate the
/// miners' returns on investment.
ProtocolGameResult protocol_game(const PoolSpec& pool, const WorkAssignment& assignment,
                                 double pool_reward, const GameEnv& env,
                                 const ProtocolOptions& options = {});

enum class ShareCostBasis { AssignedWork, ProtocolInvestment };

struct MinerShare {
  std::string id;
  double assigned_work = 0.0;
  double cost_index = 0.0;  // I^C
  double roi_index = 0.0;   // I^ROI
  double indicator = 0.0;   // normalized I^C·I^ROI
  double alpha = 0.0;
};

struct PoolResult {
  double utility = 0.0;  // R_p at the pool equilibrium
  double x_p = 0.0;
  double c_p = 0.0;
};

struct RewardShares {
  std::string reference_id;
  double pool_utility = 0.0;
  double pool_expected_reward = 0.0;
  std::vector<MinerShare> miners;

  const MinerShare* find(const std::string& id) const;
};

/// Splits the pool reward. `reference` overrides the default reference member
/// (the connected miner with the smallest c/k).
RewardShares reward_shares(const PoolSpec& pool, const WorkAssignment& assignment,
                           const ProtocolGameResult& protocol, const PoolResult& pool_result,
                           double beta, ShareCostBasis basis = ShareCostBasis::AssignedWork,
                           const std::optional<std::string>& reference = std::nullopt);

enum class SoloRole { Absent, Strategic, Nonstrategic };

struct Membership {
  double indicator = 0.0;     // 𝕀 of the miner in that pool
  double pool_utility = 0.0;  // R_p
};

/// The pool sub-game a solo miner would enter.
struct SoloContext {
  std::vector<PlayerSpec> players;
  GameEnv env;
};

/// Expected utility of mining solo in the given role. Nonstrategic miners
/// invest `investment` (capacity when NaN) on top of the l-pool.
double solo_utility(const PlayerSpec& miner, SoloRole role, const SoloContext& context,
                    double investment = std::numeric_limits<double>::quiet_NaN());

double miner_total_utility(const PlayerSpec& miner, std::span<const Membership> memberships,
                           SoloRole role, const SoloContext& context,
                           double solo_investment = std::numeric_limits<double>::quiet_NaN());

}  // namespace coopmine
