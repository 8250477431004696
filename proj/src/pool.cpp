#include "coopmine/pool.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "coopmine/stochastic.hpp"

namespace coopmine {

namespace {

bool ratio_order(const PlayerSpec& a, const PlayerSpec& b) {
  const double ra = cost_efficiency_ratio(a);
  const double rb = cost_efficiency_ratio(b);
  if (ra != rb) return ra < rb;
  return a.id < b.id;
}

double rel_change(double prev, double next) {
  const double scale = std::max({std::abs(prev), std::abs(next), 1e-300});
  return std::abs(next - prev) / scale;
}

// Capacity-weighted means of (c, k); plain means when a capacity is unbounded.
std::pair<double, double> initial_aggregates(const std::vector<PlayerSpec>& members) {
  double cap = 0.0, c = 0.0, k = 0.0;
  const bool bounded = std::all_of(members.begin(), members.end(),
                                   [](const PlayerSpec& m) { return std::isfinite(m.capacity); });
  for (const auto& m : members) {
    const double w = bounded ? m.capacity : 1.0;
    cap += w;
    c += w * m.c;
    k += w * m.k;
  }
  if (cap <= 0) {
    cap = static_cast<double>(members.size());
    c = k = 0.0;
    for (const auto& m : members) {
      c += m.c;
      k += m.k;
    }
  }
  return {c / cap, k / cap};
}

using ClassKey = std::tuple<double, double, double, double>;
using LpoolKey = std::tuple<double, double, double, double, double>;

ClassKey class_key(const PlayerSpec& p) { return {p.c, p.k, p.lambda, p.mu}; }
LpoolKey lpool_key(const PlayerSpec& p) { return {p.c, p.k, p.lambda, p.mu, p.capacity}; }

}  // namespace

std::vector<PlayerSpec> PoolSpec::connected_members() const {
  std::vector<PlayerSpec> out;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (i < connected.size() && connected[i]) out.push_back(members[i]);
  return out;
}

std::size_t PoolSpec::connected_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (i < connected.size() && connected[i]) ++n;
  return n;
}

double WorkAssignment::work_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return work[i];
  return 0.0;
}

WorkAssignment distribute_work(std::span<const PlayerSpec> members, double target) {
  if (!std::isfinite(target) || target < 0)
    throw ValidationError({"work target must be finite and non-negative"});
  for (const auto& m : members) validate_player(m);
  double capacity = 0.0;
  for (const auto& m : members) capacity += m.capacity;
  if (target > capacity * (1.0 + 1e-12))
    throw ValidationError({"insufficient aggregate capacity: target " + std::to_string(target) +
                           " exceeds " + std::to_string(capacity)});

  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ratio_order(members[a], members[b]); });

  WorkAssignment out;
  out.ids.reserve(members.size());
  for (const auto& m : members) out.ids.push_back(m.id);
  out.work.assign(members.size(), 0.0);

  double remaining = target;
  std::size_t begin = 0;
  while (begin < order.size() && remaining > 0) {
    std::size_t end = begin;
    const double ratio = cost_efficiency_ratio(members[order[begin]]);
    while (end < order.size() && cost_efficiency_ratio(members[order[end]]) == ratio) ++end;

    std::vector<std::size_t> tier(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                  order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(tier.begin(), tier.end(), [&](std::size_t a, std::size_t b) {
      if (members[a].capacity != members[b].capacity) return members[a].capacity < members[b].capacity;
      return members[a].id < members[b].id;
    });
    for (std::size_t i = 0; i < tier.size(); ++i) {
      const double level = remaining / static_cast<double>(tier.size() - i);
      const double cap = members[tier[i]].capacity;
      if (cap <= level) {
        out.work[tier[i]] = cap;
        remaining -= cap;
      } else {
        for (std::size_t j = i; j < tier.size(); ++j) out.work[tier[j]] = level;
        remaining = 0.0;
        break;
      }
    }
    begin = end;
  }

  double cx = 0.0, kx = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    out.total += out.work[i];
    cx += members[i].c * out.work[i];
    kx += members[i].k * out.work[i];
  }
  if (out.total > 0) {
    out.c_p = cx / out.total;
    out.k_p = kx / out.total;
  }
  return out;
}

PoolGame pool_fixed_point(std::span<const PoolSpec> pools, const GameEnv& env,
                          const FixedPointOptions& options, std::span<const PlayerSpec> solo_players) {
  validate_env(env);
  if (pools.empty() && solo_players.empty())
    throw ValidationError({"pool sub-game needs at least one pool or solo player"});
  if (options.damping < 0 || options.damping >= 1)
    throw ValidationError({"damping must lie in [0, 1)"});

  PoolGame game;
  game.env = env;
  std::vector<std::vector<PlayerSpec>> connected(pools.size());
  for (std::size_t p = 0; p < pools.size(); ++p) {
    connected[p] = pools[p].connected_members();
    if (connected[p].empty())
      throw ValidationError({"pool " + pools[p].id + " has no connected members"});
    const auto [c, k] = initial_aggregates(connected[p]);
    PlayerSpec agg;
    agg.id = pools[p].id;
    agg.c = c;
    agg.k = k;
    agg.t = pools[p].t;
    agg.z = pools[p].z;
    agg.capacity = 0.0;
    for (const auto& m : connected[p]) agg.capacity += m.capacity;
    game.players.push_back(std::move(agg));
  }
  game.players.insert(game.players.end(), solo_players.begin(), solo_players.end());

  std::vector<double> prev_x(pools.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    game.solution = solve_game(game.players, env);
    game.assignments.assign(pools.size(), WorkAssignment{});
    double change = 0.0;
    for (std::size_t p = 0; p < pools.size(); ++p) {
      auto& agg = game.players[p];
      const double x = game.solution.players[p].x_star;
      if (x > agg.capacity * (1.0 + 1e-12))
        throw NumericError("pool " + pools[p].id + " lacks capacity for its equilibrium investment");
      game.assignments[p] = distribute_work(connected[p], std::min(x, agg.capacity));
      if (!std::isnan(prev_x[p])) change = std::max(change, rel_change(prev_x[p], x));
      prev_x[p] = x;
      if (game.assignments[p].total > 0) {
        const double d = options.damping;
        const double c = (1 - d) * game.assignments[p].c_p + d * agg.c;
        const double k = (1 - d) * game.assignments[p].k_p + d * agg.k;
        change = std::max({change, rel_change(agg.c, c), rel_change(agg.k, k)});
        agg.c = c;
        agg.k = k;
      }
    }
    game.iterations = it;
    if (change <= options.tolerance) return game;
  }
  throw NumericError("pool fixed point did not converge within " +
                     std::to_string(options.max_iterations) + " iterations");
}

const char* to_string(ProtocolRole role) {
  switch (role) {
    case ProtocolRole::Strategic: return "strategic";
    case ProtocolRole::Nonstrategic: return "nonstrategic";
    case ProtocolRole::Idle: return "idle";
  }
  return "idle";
}

const ProtocolOutcome* ProtocolGameResult::find(const std::string& id) const {
  for (const auto& m : miners)
    if (m.id == id) return &m;
  return nullptr;
}

ProtocolGameResult protocol_game(const PoolSpec& pool, const WorkAssignment& assignment,
                                 double pool_reward, const GameEnv& env,
                                 const ProtocolOptions& options) {
  validate_env(env);
  if (!(pool_reward > 0) || !std::isfinite(pool_reward))
    throw ValidationError({"protocol game reward must be positive"});
  for (std::size_t i = 0; i < pool.members.size(); ++i)
    if (pool.connected.at(i) && std::find(assignment.ids.begin(), assignment.ids.end(),
                                          pool.members[i].id) == assignment.ids.end())
      throw ValidationError({"assignment does not cover connected miner " + pool.members[i].id});

  GameEnv genv;
  genv.r = pool_reward;
  genv.tau = 1.0;
  genv.beta = env.beta;
  genv.theta = 0.0;
  genv.l = 0.0;
  genv.k_l = 1.0;

  std::vector<PlayerSpec> members = pool.members;
  for (auto& m : members) {
    m.t = 0.0;
    m.z = 0.0;
    validate_player(m);
    if (m.c <= 0) throw ValidationError({m.id + ".c must be positive"});
  }
  const std::size_t n = members.size();
  std::vector<bool> strategic(n, true);
  std::vector<bool> in_lpool(n, false);

  // Classification: strategic iff capacity covers the equilibrium investment
  // at maximal attendance; the rest join the l-pool when the participation
  // threshold holds against the strategic active set.
  std::map<ClassKey, std::size_t> class_of;
  for (std::size_t round = 0; round <= n + 1; ++round) {
    class_of.clear();
    std::vector<PlayerGroup> groups;
    for (std::size_t i = 0; i < n; ++i) {
      if (!strategic[i]) continue;
      auto [it, fresh] = class_of.try_emplace(class_key(members[i]), groups.size());
      if (fresh) groups.push_back(PlayerGroup{members[i], 0});
      ++groups[it->second].count;
    }
    double psi_max = genv.k_l * genv.l;
    std::vector<double> x_class(groups.size(), 0.0);
    if (!groups.empty()) {
      const auto admitted = active_group_counts(groups, genv);
      double na = 0.0, w = 0.0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        na += static_cast<double>(admitted[g]);
        w += static_cast<double>(admitted[g]) * cost_weight(groups[g].profile, genv);
      }
      if (na > 0) psi_max = psi_from_sums(na, w, genv);
      for (std::size_t g = 0; g < groups.size(); ++g)
        if (admitted[g] > 0) x_class[g] = equilibrium_investment(groups[g].profile, psi_max, genv);
    }
    bool demoted = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (strategic[i] && members[i].capacity < x_class[class_of.at(class_key(members[i]))]) {
        strategic[i] = false;
        demoted = true;
      }
    }
    double l = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      in_lpool[i] = false;
      if (strategic[i] || !pool.connected[i]) continue;
      const double threshold = psi_max > 0
                                   ? genv.beta * genv.tau * block_value(members[i], genv) / psi_max
                                   : std::numeric_limits<double>::infinity();
      if (cost_efficiency_ratio(members[i]) < threshold) {
        in_lpool[i] = true;
        l += members[i].capacity;
        kl += members[i].k * members[i].capacity;
      }
    }
    if (!std::isfinite(l)) throw ValidationError({"nonstrategic miners need finite capacity"});
    const double new_kl = l > 0 ? kl / l : 1.0;
    const bool same_l = l == genv.l && new_kl == genv.k_l;
    genv.l = l;
    genv.k_l = new_kl;
    if (!demoted && same_l) break;
  }

  std::vector<ClassSpec> classes;
  class_of.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (!strategic[i]) continue;
    auto [it, fresh] = class_of.try_emplace(class_key(members[i]), classes.size());
    if (fresh) {
      ClassSpec cs;
      cs.profile = members[i];
      cs.profile.capacity = std::numeric_limits<double>::infinity();
      classes.push_back(std::move(cs));
    }
    ++classes[it->second].registered;
    if (pool.connected[i]) ++classes[it->second].present;
  }
  if (classes.empty()) throw NumericError("no miner qualifies for the protocol game of pool " + pool.id);

  ProtocolGameResult out;
  out.env = genv;
  for (const auto& c : classes) {
    out.strategic_registered += c.registered;
    out.strategic_connected += c.present;
  }
  const ClassChain chain = build_chain(classes, genv, options.state_cap);
  const StateStrategy strategy = mpe_strategy(chain, genv);
  const std::size_t start = chain.initial_state();

  std::vector<FocalValues> class_vals;
  class_vals.reserve(classes.size());
  for (std::size_t q = 0; q < classes.size(); ++q)
    class_vals.push_back(class_values(chain, strategy, genv, q));

  std::map<LpoolKey, std::pair<double, double>> lpool_vals;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pool.connected[i]) continue;
    ProtocolOutcome o;
    o.id = members[i].id;
    if (strategic[i]) {
      const std::size_t q = class_of.at(class_key(members[i]));
      o.role = ProtocolRole::Strategic;
      o.investment = strategy.x(start, q);
      o.utility = class_vals[q].present_utility[start];
      o.cost = class_vals[q].present_cost[start];
    } else if (in_lpool[i]) {
      o.role = ProtocolRole::Nonstrategic;
      o.investment = members[i].capacity;
      auto key = lpool_key(members[i]);
      auto it = lpool_vals.find(key);
      if (it == lpool_vals.end()) {
        const FocalValues v =
            fixed_investment_values(chain, strategy, genv, members[i], members[i].capacity);
        it = lpool_vals.emplace(key, std::make_pair(v.present_utility[start], v.present_cost[start])).first;
      }
      o.utility = it->second.first;
      o.cost = it->second.second;
    }
    o.roi = o.cost > 0 ? o.utility / o.cost : 0.0;
    out.miners.push_back(std::move(o));
  }
  return out;
}

const MinerShare* RewardShares::find(const std::string& id) const {
  for (const auto& m : miners)
    if (m.id == id) return &m;
  return nullptr;
}

RewardShares reward_shares(const PoolSpec& pool, const WorkAssignment& assignment,
                           const ProtocolGameResult& protocol, const PoolResult& pool_result,
                           double beta, ShareCostBasis basis,
                           const std::optional<std::string>& reference) {
  if (!(beta > 0)) throw ValidationError({"beta must be positive"});
  const auto connected = pool.connected_members();
  if (connected.empty()) throw ValidationError({"pool " + pool.id + " has no connected members"});

  std::vector<double> work(connected.size()), roi(connected.size());
  for (std::size_t i = 0; i < connected.size(); ++i) {
    const auto* po = protocol.find(connected[i].id);
    if (!po) throw ValidationError({"protocol results miss connected miner " + connected[i].id});
    roi[i] = po->roi;
    work[i] = basis == ShareCostBasis::AssignedWork ? assignment.work_of(connected[i].id) : po->investment;
  }

  std::size_t ref = 0;
  if (reference) {
    auto it = std::find_if(connected.begin(), connected.end(),
                           [&](const PlayerSpec& m) { return m.id == *reference; });
    if (it == connected.end()) throw ValidationError({"reference miner " + *reference + " is not connected"});
    ref = static_cast<std::size_t>(it - connected.begin());
  } else {
    for (std::size_t i = 1; i < connected.size(); ++i)
      if (ratio_order(connected[i], connected[ref])) ref = i;
  }
  const double ref_cost = connected[ref].c * work[ref];
  if (!(ref_cost > 0)) throw ValidationError({"reference miner " + connected[ref].id + " has zero cost"});
  if (roi[ref] == 0) throw ValidationError({"reference miner " + connected[ref].id + " has zero ROI"});

  RewardShares out;
  out.reference_id = connected[ref].id;
  out.pool_utility = pool_result.utility;
  const double pool_cost = pool_result.c_p * pool_result.x_p / beta;
  out.pool_expected_reward = pool_result.utility + pool_cost;

  double norm = 0.0;
  out.miners.resize(connected.size());
  for (std::size_t i = 0; i < connected.size(); ++i) {
    auto& m = out.miners[i];
    m.id = connected[i].id;
    m.assigned_work = assignment.work_of(connected[i].id);
    m.cost_index = connected[i].c * work[i] / ref_cost;
    m.roi_index = roi[i] / roi[ref];
    norm += m.cost_index * m.roi_index;
  }
  for (std::size_t i = 0; i < connected.size(); ++i) {
    auto& m = out.miners[i];
    m.indicator = norm != 0 ? m.cost_index * m.roi_index / norm : 0.0;
    m.alpha = (m.indicator * pool_result.utility + connected[i].c * work[i] / beta) /
              out.pool_expected_reward;
  }
  return out;
}

double solo_utility(const PlayerSpec& miner, SoloRole role, const SoloContext& context,
                    double investment) {
  validate_env(context.env);
  validate_player(miner);
  switch (role) {
    case SoloRole::Absent:
      return 0.0;
    case SoloRole::Strategic: {
      std::vector<PlayerSpec> players = context.players;
      players.push_back(miner);
      const auto sol = solve_game(players, context.env);
      const auto& me = sol.players.back();
      if (miner.capacity < me.x_star)
        throw ValidationError({"inconsistent role: " + miner.id +
                               " lacks capacity for the strategic equilibrium investment"});
      return me.utility;
    }
    case SoloRole::Nonstrategic: {
      const double v = std::isnan(investment) ? miner.capacity : investment;
      if (!std::isfinite(v) || v < 0 || v > miner.capacity)
        throw ValidationError({"nonstrategic investment must lie within capacity"});
      GameEnv env = context.env;
      const double weighted = env.k_l * env.l + miner.k * v;
      env.l += v;
      if (env.l > 0) env.k_l = weighted / env.l;
      const auto sol = context.players.empty() ? EquilibriumSolution{} : solve_game(context.players, env);
      double power = env.k_l * env.l;
      for (std::size_t i = 0; i < context.players.size(); ++i)
        power += context.players[i].k * sol.players[i].x_star;
      const double share = power > 0 ? miner.k * v / power : 0.0;
      return share * effective_reward(miner, env) - miner.c * v / env.beta;
    }
  }
  return 0.0;
}

double miner_total_utility(const PlayerSpec& miner, std::span<const Membership> memberships,
                           SoloRole role, const SoloContext& context, double solo_investment) {
  double total = 0.0;
  for (const auto& m : memberships) total += m.indicator * m.pool_utility;
  return total + solo_utility(miner, role, context, solo_investment);
}

}  // namespace coopmine
