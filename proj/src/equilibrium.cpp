#include "coopmine/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace coopmine {

namespace {

void require_solvable(const PlayerSpec& p, const GameEnv& env) {
  auto issues = player_issues(p);
  if (p.c <= 0) issues.push_back((p.id.empty() ? std::string("player") : p.id) + ".c must be positive");
  if (!(block_value(p, env) > 0))
    issues.push_back((p.id.empty() ? std::string("player") : p.id) +
                     " has non-positive effective reward");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

bool weight_order(const PlayerSpec& a, const PlayerSpec& b, const GameEnv& env) {
  const double wa = cost_weight(a, env);
  const double wb = cost_weight(b, env);
  if (wa != wb) return wa < wb;
  return a.id < b.id;
}

// ψ of an already admitted set, or k_l·l when nobody is admitted yet.
double admitted_psi(double n, double weight_sum, const GameEnv& env) {
  if (n == 0) return env.k_l * env.l;
  return psi_from_sums(n, weight_sum, env);
}

bool admits(const PlayerSpec& p, double psi_admitted, const GameEnv& env) {
  return cost_weight(p, env) * psi_admitted < env.beta * env.tau;
}

}  // namespace

const PlayerOutcome* EquilibriumSolution::find(const std::string& id) const {
  for (const auto& p : players)
    if (p.id == id) return &p;
  return nullptr;
}

double EquilibriumSolution::total_power(const GameEnv& env) const {
  double s = env.l;
  for (const auto& p : players) s += p.x_star;
  return s;
}

double cost_weight(const PlayerSpec& p, const GameEnv& env) {
  return p.c / (p.k * block_value(p, env));
}

double psi_from_sums(double n_active, double weight_sum, const GameEnv& env) {
  const double bt = env.beta * env.tau;
  const double m = n_active - 1.0;
  const double disc = m * m + 4.0 * env.k_l * env.l / bt * weight_sum;
  return (m + std::sqrt(disc)) / (2.0 / bt * weight_sum);
}

double psi(std::span<const PlayerSpec> active, const GameEnv& env) {
  validate_env(env);
  if (active.empty()) throw ValidationError({"active set must be nonempty"});
  double w = 0.0;
  for (const auto& p : active) {
    require_solvable(p, env);
    w += cost_weight(p, env);
  }
  return psi_from_sums(static_cast<double>(active.size()), w, env);
}

double psi(std::span<const PlayerGroup> active, const GameEnv& env) {
  validate_env(env);
  double n = 0.0, w = 0.0;
  for (const auto& g : active) {
    if (g.count == 0) continue;
    require_solvable(g.profile, env);
    n += static_cast<double>(g.count);
    w += static_cast<double>(g.count) * cost_weight(g.profile, env);
  }
  if (n == 0) throw ValidationError({"active set must be nonempty"});
  return psi_from_sums(n, w, env);
}

double equilibrium_investment(const PlayerSpec& p, double psi_value, const GameEnv& env) {
  const double x = psi_value * (1.0 / p.k - psi_value * cost_weight(p, env) / (p.k * env.beta * env.tau));
  return std::max(x, 0.0);
}

double static_utility(const PlayerSpec& p, double x, double others_power, const GameEnv& env) {
  const double total = p.k * x + others_power;
  const double share = total > 0 ? p.k * x / total : 0.0;
  return share * effective_reward(p, env) - p.c * x / env.beta;
}

EquilibriumSolution equilibrium_strategy(std::span<const PlayerSpec> active, const GameEnv& env) {
  EquilibriumSolution sol;
  sol.psi = psi(active, env);
  sol.players.reserve(active.size());
  double effective = env.k_l * env.l;
  for (const auto& p : active) {
    PlayerOutcome o;
    o.id = p.id;
    o.x_star = equilibrium_investment(p, sol.psi, env);
    effective += p.k * o.x_star;
    sol.players.push_back(std::move(o));
  }
  for (std::size_t i = 0; i < active.size(); ++i) {
    auto& o = sol.players[i];
    o.win_prob = effective > 0 ? active[i].k * o.x_star / effective : 0.0;
    o.reward = o.win_prob * effective_reward(active[i], env);
    o.cost = active[i].c * o.x_star / env.beta;
    o.utility = o.reward - o.cost;
  }
  sol.nonstrategic_share = effective > 0 ? env.k_l * env.l / effective : 0.0;
  return sol;
}

EquilibriumSolution solve_game(std::span<const PlayerSpec> candidates, const GameEnv& env) {
  const auto active = active_set(candidates, env);
  EquilibriumSolution sol;
  if (!active.empty()) {
    sol = equilibrium_strategy(active, env);
  } else {
    sol.psi = env.k_l * env.l;
    sol.nonstrategic_share = sol.psi > 0 ? 1.0 : 0.0;
  }
  EquilibriumSolution out;
  out.psi = sol.psi;
  out.nonstrategic_share = sol.nonstrategic_share;
  out.players.reserve(candidates.size());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < sol.players.size(); ++i) index.emplace(sol.players[i].id, i);
  for (const auto& c : candidates) {
    if (auto it = index.find(c.id); it != index.end()) {
      out.players.push_back(sol.players[it->second]);
    } else {
      PlayerOutcome zero;
      zero.id = c.id;
      out.players.push_back(std::move(zero));
    }
  }
  return out;
}

Participation participation_condition(const PlayerSpec& candidate,
                                      std::span<const PlayerSpec> active, const GameEnv& env) {
  validate_env(env);
  require_solvable(candidate, env);
  Participation out;
  const double value = block_value(candidate, env);
  if (active.empty()) {
    const double base = env.k_l * env.l;
    out.threshold = base > 0 ? env.beta * env.tau * value / base
                             : std::numeric_limits<double>::infinity();
  } else {
    double w = 0.0;
    for (const auto& p : active) {
      require_solvable(p, env);
      w += cost_weight(p, env);
    }
    const double m = static_cast<double>(active.size()) - 1.0;
    const double denom = m + std::sqrt(m * m + 4.0 * env.k_l * env.l / (env.beta * env.tau) * w);
    out.threshold = denom > 0 ? value * 2.0 * w / denom : std::numeric_limits<double>::infinity();
  }
  out.participates = cost_efficiency_ratio(candidate) < out.threshold;
  return out;
}

std::vector<PlayerSpec> active_set(std::span<const PlayerSpec> candidates, const GameEnv& env) {
  validate_env(env);
  for (const auto& p : candidates) require_solvable(p, env);
  std::vector<PlayerSpec> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end(),
            [&](const PlayerSpec& a, const PlayerSpec& b) { return weight_order(a, b, env); });
  std::vector<PlayerSpec> admitted;
  double n = 0.0, w = 0.0;
  for (auto& p : sorted) {
    if (!admits(p, admitted_psi(n, w, env), env)) break;
    n += 1.0;
    w += cost_weight(p, env);
    admitted.push_back(std::move(p));
  }
  return admitted;
}

std::vector<std::size_t> active_group_counts(std::span<const PlayerGroup> groups,
                                             const GameEnv& env) {
  validate_env(env);
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& g : groups)
    if (g.count > 0) require_solvable(g.profile, env);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return weight_order(groups[a].profile, groups[b].profile, env);
  });
  std::vector<std::size_t> admitted(groups.size(), 0);
  double n = 0.0, w = 0.0;
  for (std::size_t gi : order) {
    const auto& g = groups[gi];
    const double wg = g.count > 0 ? cost_weight(g.profile, env) : 0.0;
    for (std::size_t m = 0; m < g.count; ++m) {
      if (!admits(g.profile, admitted_psi(n, w, env), env)) return admitted;
      n += 1.0;
      w += wg;
      ++admitted[gi];
    }
  }
  return admitted;
}

double best_response_oracle(const PlayerSpec& player, std::span<const Investment> others,
                            const GameEnv& env, const OracleGrid& grid) {
  validate_env(env);
  require_solvable(player, env);
  const double upper =
      grid.upper > 0 ? grid.upper : env.beta * effective_reward(player, env) / player.c;
  if (grid.points < 3 || !(upper > 0) || !std::isfinite(upper) || !(grid.tolerance > 0))
    throw ValidationError({"oracle grid is degenerate"});

  double others_power = env.k_l * env.l;
  for (const auto& o : others) others_power += o.player.k * o.x;

  const double step = upper / static_cast<double>(grid.points - 1);
  if (others_power <= 0) return step;

  auto z = [&](double x) { return static_utility(player, x, others_power, env); };

  std::size_t best = 0;
  double best_val = z(0.0);
  for (std::size_t i = 1; i < grid.points; ++i) {
    const double v = z(step * static_cast<double>(i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = step * static_cast<double>(best == 0 ? 0 : best - 1);
  double hi = step * static_cast<double>(std::min(best + 1, grid.points - 1));

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = z(x1), f2 = z(x2);
  for (int it = 0; it < 400 && hi - lo > grid.tolerance; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = z(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = z(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace coopmine
