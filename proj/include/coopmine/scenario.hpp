#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coopmine/pool.hpp"

namespace coopmine {

/// Pools, their miners and the environment of the pool sub-game.
struct Network {
  GameEnv env;
  std::vector<PoolSpec> pools;
  std::vector<PlayerSpec> solos;  // strategic solo miners competing with the pools
  FixedPointOptions fixed_point;
  ProtocolOptions protocol;
  ShareCostBasis basis = ShareCostBasis::AssignedWork;
};

/// Pool sub-game, then per pool the protocol game and the reward split.
struct PipelineResult {
  PoolGame game;
  std::vector<ProtocolGameResult> protocols;
  std::vector<RewardShares> shares;

  /// 𝕀_i·R_p of a connected miner of pool `pool`.
  double member_utility(std::size_t pool, const std::string& id) const;
};

PipelineResult run_pool_pipeline(const Network& network);

/// Grouping label: PlayerSpec::profile, or a key built from the economics.
std::string profile_label(const PlayerSpec& p);

/// Miners leaving their pools and mining alone.
struct SoloEntry {
  GameEnv env;  // l includes the nonstrategic entrants
  PoolGame game;
  std::vector<SoloRole> roles;     // per entrant
  std::vector<double> utilities;   // per entrant, $ per block
};

/// Entrants start strategic; those lacking capacity for x* join the l-pool,
/// and l-pool entrants failing the participation threshold stay absent.
SoloEntry enter_solo(const std::vector<PoolSpec>& pools, const GameEnv& env,
                     const std::vector<PlayerSpec>& entrants, const FixedPointOptions& options);

enum class ScenarioKind { MutualCooperation, Desertion, MutualDesertion };

struct Scenario {
  ScenarioKind kind = ScenarioKind::MutualCooperation;
  std::string profile;     // deserting profile (Desertion only)
  std::size_t count = 1;   // number of deserters of that profile
};

struct ProfileUtility {
  std::string profile;
  double utility = 0.0;
};

struct ScenarioOutcome {
  std::vector<ProfileUtility> cooperators;  // a-values
  std::vector<ProfileUtility> deserters;    // b-values
  std::vector<SoloRole> deserter_roles;     // parallel to deserters

  double cooperator(const std::string& profile) const;
  double deserter(const std::string& profile) const;
};

/// Desertion removes `count` connected members of the profile from the first
/// pool holding it; the cooperator values are read from another pool. Deserters
/// mine solo with their former pool's block composition (t, z).
ScenarioOutcome scenario_utilities(const Network& network, const Scenario& scenario);

/// One profile's dilemma utilities. b_n1 is the lone deserter facing n−1
/// cooperators, b_n2 a deserter when two of the profile desert.
struct ScenarioRow {
  std::string profile;
  double a_n1 = 0.0, a_n2 = 0.0;
  double b_n1 = 0.0, b_n2 = 0.0, b_0 = 0.0;
  double sdp1_a = 0.0;  // a_{n−1}/a_{n−2}
  double sdp1_b = 0.0;  // b_{n−1}/b_{n−2}
  double sdp2 = 0.0;    // b_{n−1}/a_{n−1}
  double sdp3 = 0.0;    // a_{n−1}/b_0
};

std::vector<ScenarioRow> scenario_table(const Network& network);

}  // namespace coopmine
