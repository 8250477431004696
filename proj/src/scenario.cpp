#include "coopmine/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

namespace coopmine {

namespace {

std::vector<std::string> connected_profiles(const Network& network) {
  std::vector<std::string> out;
  for (const auto& pool : network.pools)
    for (const auto& m : pool.connected_members()) {
      auto label = profile_label(m);
      if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(std::move(label));
    }
  return out;
}

// First connected member of `profile`, searching pools in order but preferring
// pools other than `avoid`.
std::pair<std::size_t, std::string> find_member(const Network& network, const std::string& profile,
                                                std::size_t avoid) {
  std::pair<std::size_t, std::string> fallback{network.pools.size(), ""};
  for (std::size_t p = 0; p < network.pools.size(); ++p)
    for (const auto& m : network.pools[p].connected_members()) {
      if (profile_label(m) != profile) continue;
      if (p != avoid) return {p, m.id};
      if (fallback.second.empty()) fallback = {p, m.id};
    }
  return fallback;
}

// A deserter keeps building the blocks its pool built.
PlayerSpec as_solo(PlayerSpec m, const PoolSpec& pool) {
  m.t = pool.t;
  m.z = pool.z;
  return m;
}

double ratio(double num, double den) {
  return den != 0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double PipelineResult::member_utility(std::size_t pool, const std::string& id) const {
  const auto* share = shares.at(pool).find(id);
  if (!share) throw ValidationError({"miner " + id + " is not connected to pool " + std::to_string(pool)});
  return share->indicator * shares[pool].pool_utility;
}

PipelineResult run_pool_pipeline(const Network& network) {
  PipelineResult out;
  out.game = pool_fixed_point(network.pools, network.env, network.fixed_point, network.solos);
  const std::size_t np = network.pools.size();
  out.protocols.resize(np);
  out.shares.resize(np);
  std::vector<std::exception_ptr> errors(np);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(np); ++ip) {
    const auto p = static_cast<std::size_t>(ip);
    try {
      const auto& pool = network.pools[p];
      const auto& assignment = out.game.assignments[p];
      out.protocols[p] = protocol_game(pool, assignment, out.game.pool_expected_reward(p),
                                       network.env, network.protocol);
      PoolResult pr;
      pr.utility = out.game.pool_outcome(p).utility;
      pr.x_p = assignment.total;
      pr.c_p = assignment.c_p;
      out.shares[p] = reward_shares(pool, assignment, out.protocols[p], pr, network.env.beta,
                                    network.basis);
    } catch (...) {
      errors[p] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string profile_label(const PlayerSpec& p) {
  if (!p.profile.empty()) return p.profile;
  char buf[160];
  std::snprintf(buf, sizeof buf, "c=%.12g,k=%.12g,cap=%.12g,lambda=%.12g,mu=%.12g", p.c, p.k,
                p.capacity, p.lambda, p.mu);
  return buf;
}

SoloEntry enter_solo(const std::vector<PoolSpec>& pools, const GameEnv& env,
                     const std::vector<PlayerSpec>& entrants, const FixedPointOptions& options) {
  SoloEntry out;
  out.roles.assign(entrants.size(), SoloRole::Strategic);
  out.utilities.assign(entrants.size(), 0.0);

  for (std::size_t round = 0; round <= 2 * entrants.size() + 1; ++round) {
    out.env = env;
    double weighted = env.k_l * env.l;
    std::vector<PlayerSpec> strategic;
    std::vector<std::size_t> strategic_idx;
    for (std::size_t i = 0; i < entrants.size(); ++i) {
      if (out.roles[i] == SoloRole::Strategic) {
        strategic.push_back(entrants[i]);
        strategic_idx.push_back(i);
      } else if (out.roles[i] == SoloRole::Nonstrategic) {
        if (!std::isfinite(entrants[i].capacity))
          throw ValidationError({entrants[i].id + " cannot mine nonstrategically with unbounded capacity"});
        out.env.l += entrants[i].capacity;
        weighted += entrants[i].k * entrants[i].capacity;
      }
    }
    if (out.env.l > 0) out.env.k_l = weighted / out.env.l;

    if (pools.empty() && strategic.empty()) {
      out.game = PoolGame{};
      out.game.env = out.env;
      out.game.solution.psi = out.env.k_l * out.env.l;
    } else {
      out.game = pool_fixed_point(pools, out.env, options, strategic);
    }

    bool changed = false;
    for (std::size_t s = 0; s < strategic.size(); ++s) {
      const auto& o = out.game.solution.players[pools.size() + s];
      if (entrants[strategic_idx[s]].capacity < o.x_star) {
        out.roles[strategic_idx[s]] = SoloRole::Nonstrategic;
        changed = true;
      }
    }
    if (changed) continue;

    double power = out.env.k_l * out.env.l;
    for (std::size_t i = 0; i < out.game.players.size(); ++i)
      power += out.game.players[i].k * out.game.solution.players[i].x_star;

    for (std::size_t i = 0; i < entrants.size(); ++i) {
      if (out.roles[i] != SoloRole::Nonstrategic) continue;
      const auto& e = entrants[i];
      if (!(power > 0) || cost_efficiency_ratio(e) >= out.env.beta * out.env.tau * block_value(e, out.env) / power) {
        out.roles[i] = SoloRole::Absent;
        changed = true;
      }
    }
    if (changed) continue;

    for (std::size_t s = 0; s < strategic.size(); ++s)
      out.utilities[strategic_idx[s]] = out.game.solution.players[pools.size() + s].utility;
    for (std::size_t i = 0; i < entrants.size(); ++i) {
      if (out.roles[i] != SoloRole::Nonstrategic) continue;
      const auto& e = entrants[i];
      out.utilities[i] = e.k * e.capacity / power * effective_reward(e, out.env) - e.c * e.capacity / out.env.beta;
    }
    return out;
  }
  throw NumericError("solo role classification did not settle");
}

double ScenarioOutcome::cooperator(const std::string& profile) const {
  for (const auto& u : cooperators)
    if (u.profile == profile) return u.utility;
  throw ValidationError({"no cooperator of profile " + profile});
}

double ScenarioOutcome::deserter(const std::string& profile) const {
  for (const auto& u : deserters)
    if (u.profile == profile) return u.utility;
  throw ValidationError({"no deserter of profile " + profile});
}

ScenarioOutcome scenario_utilities(const Network& network, const Scenario& scenario) {
  validate_env(network.env);
  const auto profiles = connected_profiles(network);
  if (profiles.empty()) throw ValidationError({"network has no connected miners"});
  ScenarioOutcome out;

  if (scenario.kind == ScenarioKind::MutualCooperation) {
    const auto result = run_pool_pipeline(network);
    for (const auto& prof : profiles) {
      const auto [p, id] = find_member(network, prof, network.pools.size());
      out.cooperators.push_back({prof, result.member_utility(p, id)});
    }
    return out;
  }

  if (scenario.kind == ScenarioKind::MutualDesertion) {
    std::vector<PlayerSpec> entrants = network.solos;
    for (const auto& pool : network.pools)
      for (const auto& m : pool.connected_members()) entrants.push_back(as_solo(m, pool));
    const auto entry = enter_solo({}, network.env, entrants, network.fixed_point);
    for (const auto& prof : profiles)
      for (std::size_t i = network.solos.size(); i < entrants.size(); ++i)
        if (profile_label(entrants[i]) == prof) {
          out.deserters.push_back({prof, entry.utilities[i]});
          out.deserter_roles.push_back(entry.roles[i]);
          break;
        }
    return out;
  }

  // Desertion
  if (scenario.count == 0) throw ValidationError({"desertion needs at least one deserter"});
  Network changed = network;
  std::vector<PlayerSpec> deserters;
  std::size_t source = network.pools.size();
  for (std::size_t p = 0; p < changed.pools.size() && source == network.pools.size(); ++p) {
    auto& pool = changed.pools[p];
    for (std::size_t i = 0; i < pool.members.size() && deserters.size() < scenario.count; ++i) {
      if (!pool.connected[i] || profile_label(pool.members[i]) != scenario.profile) continue;
      pool.connected[i] = false;
      deserters.push_back(as_solo(pool.members[i], pool));
      source = p;
    }
  }
  if (deserters.size() < scenario.count)
    throw ValidationError({"pool " + (source < network.pools.size() ? network.pools[source].id : std::string("?")) +
                           " lacks " + std::to_string(scenario.count) + " connected miners of profile " +
                           scenario.profile});

  std::vector<PlayerSpec> entrants = network.solos;
  entrants.insert(entrants.end(), deserters.begin(), deserters.end());
  const auto entry = enter_solo(changed.pools, network.env, entrants, network.fixed_point);
  out.deserters.push_back({scenario.profile, entry.utilities[network.solos.size()]});
  out.deserter_roles.push_back(entry.roles[network.solos.size()]);

  // Remaining members play the pool pipeline in the new environment; strategic
  // deserters compete as solo players, nonstrategic ones sit in l.
  changed.env = entry.env;
  changed.solos.clear();
  for (std::size_t i = 0; i < entrants.size(); ++i)
    if (entry.roles[i] == SoloRole::Strategic) changed.solos.push_back(entrants[i]);
  const auto result = run_pool_pipeline(changed);
  for (const auto& prof : profiles) {
    const auto [p, id] = find_member(changed, prof, source);
    if (id.empty()) continue;
    out.cooperators.push_back({prof, result.member_utility(p, id)});
  }
  return out;
}

std::vector<ScenarioRow> scenario_table(const Network& network) {
  const auto profiles = connected_profiles(network);
  const auto coop = scenario_utilities(network, {ScenarioKind::MutualCooperation, "", 0});
  const auto mutual = scenario_utilities(network, {ScenarioKind::MutualDesertion, "", 0});
  std::vector<ScenarioRow> rows;
  for (const auto& prof : profiles) {
    const auto one = scenario_utilities(network, {ScenarioKind::Desertion, prof, 1});
    const auto two = scenario_utilities(network, {ScenarioKind::Desertion, prof, 2});
    ScenarioRow row;
    row.profile = prof;
    row.a_n1 = coop.cooperator(prof);
    row.a_n2 = one.cooperator(prof);
    row.b_n1 = one.deserter(prof);
    row.b_n2 = two.deserter(prof);
    row.b_0 = mutual.deserter(prof);
    row.sdp1_a = ratio(row.a_n1, row.a_n2);
    row.sdp1_b = ratio(row.b_n1, row.b_n2);
    row.sdp2 = ratio(row.b_n1, row.a_n1);
    row.sdp3 = ratio(row.a_n1, row.b_0);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace coopmine
