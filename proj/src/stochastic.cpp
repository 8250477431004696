#include "coopmine/stochastic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "coopmine/equilibrium.hpp"

namespace coopmine {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Solved {
  Eigen::VectorXd utility;
  Eigen::VectorXd cost;
};

Solved solve_two(std::size_t n, const Triplets& triplets, const Eigen::VectorXd& rhs_utility,
                 const Eigen::VectorXd& rhs_cost) {
  SparseMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericError("singular expected-utility system");
  Solved out{lu.solve(rhs_utility), lu.solve(rhs_cost)};
  if (lu.info() != Eigen::Success) throw NumericError("expected-utility solve failed");
  return out;
}

double effective_power(const ClassChain& chain, const StateStrategy& strategy, std::size_t s,
                       const GameEnv& env) {
  double total = env.k_l * env.l;
  for (std::size_t q = 0; q < chain.num_classes(); ++q)
    total += static_cast<double>(chain.count(s, q)) * chain.classes()[q].profile.k * strategy.x(s, q);
  return total;
}

}  // namespace

ClassChain::ClassChain(std::vector<ClassSpec> classes, double beta, std::size_t state_cap)
    : classes_(std::move(classes)), beta_(beta) {
  std::vector<std::string> issues;
  if (classes_.empty()) issues.emplace_back("chain needs at least one class");
  if (!(beta_ > 0)) issues.emplace_back("beta must be positive");
  for (std::size_t q = 0; q < classes_.size(); ++q) {
    const auto& c = classes_[q];
    auto pi = player_issues(c.profile, "classes[" + std::to_string(q) + "]");
    issues.insert(issues.end(), pi.begin(), pi.end());
    if (c.present > c.registered)
      issues.push_back("classes[" + std::to_string(q) + "].present exceeds registered");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  stride_.resize(classes_.size());
  double states = 1.0;
  for (std::size_t q = 0; q < classes_.size(); ++q) {
    stride_[q] = num_states_;
    states *= static_cast<double>(classes_[q].registered + 1);
    if (states > static_cast<double>(state_cap))
      throw ValidationError({"state space exceeds cap of " + std::to_string(state_cap) + " states"});
    num_states_ *= classes_[q].registered + 1;
  }
}

std::vector<std::size_t> ClassChain::counts(std::size_t state) const {
  std::vector<std::size_t> out(classes_.size());
  for (std::size_t q = 0; q < classes_.size(); ++q) out[q] = count(state, q);
  return out;
}

std::size_t ClassChain::index(std::span<const std::size_t> counts) const {
  std::size_t s = 0;
  for (std::size_t q = 0; q < classes_.size(); ++q) s += counts[q] * stride_[q];
  return s;
}

std::size_t ClassChain::initial_state() const {
  std::size_t s = 0;
  for (std::size_t q = 0; q < classes_.size(); ++q) s += classes_[q].present * stride_[q];
  return s;
}

double ClassChain::total_rate(std::size_t state) const {
  double d = beta_;
  for (std::size_t q = 0; q < classes_.size(); ++q)
    d += arrival_rate(state, q) + departure_rate(state, q);
  return d;
}

ClassChain build_chain(std::vector<ClassSpec> classes, const GameEnv& env, std::size_t state_cap) {
  validate_env(env);
  return ClassChain(std::move(classes), env.beta, state_cap);
}

StateStrategy mpe_strategy(const ClassChain& chain, const GameEnv& env) {
  validate_env(env);
  const std::size_t nq = chain.num_classes();
  StateStrategy out;
  out.num_classes = nq;
  out.psi.assign(chain.num_states(), 0.0);
  out.investment.assign(chain.num_states() * nq, 0.0);

  std::vector<PlayerGroup> groups(nq);
  std::vector<double> weights(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    groups[q].profile = chain.classes()[q].profile;
    weights[q] = cost_weight(groups[q].profile, env);
  }
  for (std::size_t s = 0; s < chain.num_states(); ++s) {
    for (std::size_t q = 0; q < nq; ++q) groups[q].count = chain.count(s, q);
    const auto admitted = active_group_counts(groups, env);
    double n = 0.0, w = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      if (admitted[q] != 0 && admitted[q] != groups[q].count)
        throw NumericError("identical players split by the active-set rule");
      n += static_cast<double>(admitted[q]);
      w += static_cast<double>(admitted[q]) * weights[q];
    }
    const double psi_s = n > 0 ? psi_from_sums(n, w, env) : env.k_l * env.l;
    out.psi[s] = psi_s;
    for (std::size_t q = 0; q < nq; ++q)
      if (admitted[q] > 0) out.investment[s * nq + q] = equilibrium_investment(groups[q].profile, psi_s, env);
  }
  return out;
}

FocalValues class_values(const ClassChain& chain, const StateStrategy& strategy,
                         const GameEnv& env, std::size_t cls) {
  const std::size_t ns = chain.num_states();
  const std::size_t nq = chain.num_classes();
  const auto& focal = chain.classes().at(cls).profile;
  const std::size_t reg = chain.classes()[cls].registered;
  const double payout = effective_reward(focal, env);

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pidx(ns, kNone), aidx(ns, kNone);
  std::size_t n = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    const std::size_t c = chain.count(s, cls);
    if (c >= 1) pidx[s] = n++;
    if (c < reg) aidx[s] = n++;
  }

  Triplets trip;
  trip.reserve(n * (2 * nq + 2));
  Eigen::VectorXd rhs_u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs_c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  auto add = [&](std::size_t row, std::size_t col, double v) {
    if (v != 0.0) trip.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
  };

  for (std::size_t s = 0; s < ns; ++s) {
    const double d = chain.total_rate(s);
    const std::size_t c = chain.count(s, cls);
    if (pidx[s] != kNone) {
      const std::size_t row = pidx[s];
      add(row, row, 1.0);
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t cq = chain.count(s, q);
        const auto& prof = chain.classes()[q].profile;
        const double arrivals = static_cast<double>(chain.classes()[q].registered - cq) * prof.lambda;
        if (arrivals > 0) add(row, pidx[chain.up(s, q)], -arrivals / d);
        if (q == cls) {
          const double others = static_cast<double>(cq - 1) * prof.mu;
          if (others > 0) add(row, pidx[chain.down(s, q)], -others / d);
          if (prof.mu > 0) add(row, aidx[chain.down(s, q)], -prof.mu / d);
        } else {
          const double departures = static_cast<double>(cq) * prof.mu;
          if (departures > 0) add(row, pidx[chain.down(s, q)], -departures / d);
        }
      }
      const double x = strategy.x(s, cls);
      const double power = effective_power(chain, strategy, s, env);
      const double share = power > 0 ? focal.k * x / power : 0.0;
      const double cost = focal.c * x / d;
      rhs_u[static_cast<Eigen::Index>(row)] = chain.beta() / d * share * payout - cost;
      rhs_c[static_cast<Eigen::Index>(row)] = cost;
    }
    if (aidx[s] != kNone) {
      const std::size_t row = aidx[s];
      add(row, row, 1.0);
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t cq = chain.count(s, q);
        const auto& prof = chain.classes()[q].profile;
        const double departures = static_cast<double>(cq) * prof.mu;
        if (departures > 0) add(row, aidx[chain.down(s, q)], -departures / d);
        if (q == cls) {
          const double others = static_cast<double>(reg - c - 1) * prof.lambda;
          if (others > 0) add(row, aidx[chain.up(s, q)], -others / d);
          if (prof.lambda > 0) add(row, pidx[chain.up(s, q)], -prof.lambda / d);
        } else {
          const double arrivals = static_cast<double>(chain.classes()[q].registered - cq) * prof.lambda;
          if (arrivals > 0) add(row, aidx[chain.up(s, q)], -arrivals / d);
        }
      }
    }
  }

  const Solved sol = solve_two(n, trip, rhs_u, rhs_c);
  FocalValues out;
  out.present_utility.assign(ns, kNaN);
  out.present_cost.assign(ns, kNaN);
  out.absent_utility.assign(ns, kNaN);
  out.absent_cost.assign(ns, kNaN);
  for (std::size_t s = 0; s < ns; ++s) {
    if (pidx[s] != kNone) {
      out.present_utility[s] = sol.utility[static_cast<Eigen::Index>(pidx[s])];
      out.present_cost[s] = sol.cost[static_cast<Eigen::Index>(pidx[s])];
    }
    if (aidx[s] != kNone) {
      out.absent_utility[s] = sol.utility[static_cast<Eigen::Index>(aidx[s])];
      out.absent_cost[s] = sol.cost[static_cast<Eigen::Index>(aidx[s])];
    }
  }
  return out;
}

UtilityTable expected_utilities(const ClassChain& chain, const StateStrategy& strategy,
                                const GameEnv& env) {
  validate_env(env);
  UtilityTable table;
  table.by_class.reserve(chain.num_classes());
  for (std::size_t q = 0; q < chain.num_classes(); ++q)
    table.by_class.push_back(class_values(chain, strategy, env, q));
  return table;
}

FocalValues fixed_investment_values(const ClassChain& chain, const StateStrategy& strategy,
                                    const GameEnv& env, const PlayerSpec& focal, double investment) {
  validate_env(env);
  validate_player(focal);
  const std::size_t ns = chain.num_states();
  const std::size_t nq = chain.num_classes();
  const double payout = effective_reward(focal, env);
  const std::size_t n = 2 * ns;  // present rows [0, ns), absent rows [ns, 2ns)

  Triplets trip;
  trip.reserve(n * (2 * nq + 2));
  Eigen::VectorXd rhs_u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs_c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  auto add = [&](std::size_t row, std::size_t col, double v) {
    if (v != 0.0) trip.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
  };

  for (std::size_t s = 0; s < ns; ++s) {
    const double base = chain.total_rate(s);
    for (int present = 1; present >= 0; --present) {
      const std::size_t offset = present ? 0 : ns;
      const std::size_t row = offset + s;
      const double d = base + (present ? focal.mu : focal.lambda);
      add(row, row, 1.0);
      for (std::size_t q = 0; q < nq; ++q) {
        const double arrivals = chain.arrival_rate(s, q);
        const double departures = chain.departure_rate(s, q);
        if (arrivals > 0) add(row, offset + chain.up(s, q), -arrivals / d);
        if (departures > 0) add(row, offset + chain.down(s, q), -departures / d);
      }
      const double toggle = present ? focal.mu : focal.lambda;
      if (toggle > 0) add(row, (present ? ns : 0) + s, -toggle / d);
      if (present) {
        const double power = effective_power(chain, strategy, s, env);
        const double share = power > 0 ? focal.k * investment / power : 0.0;
        const double cost = focal.c * investment / d;
        rhs_u[static_cast<Eigen::Index>(row)] = chain.beta() / d * share * payout - cost;
        rhs_c[static_cast<Eigen::Index>(row)] = cost;
      }
    }
  }

  const Solved sol = solve_two(n, trip, rhs_u, rhs_c);
  FocalValues out;
  out.present_utility.resize(ns);
  out.present_cost.resize(ns);
  out.absent_utility.resize(ns);
  out.absent_cost.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto p = static_cast<Eigen::Index>(s);
    const auto a = static_cast<Eigen::Index>(ns + s);
    out.present_utility[s] = sol.utility[p];
    out.present_cost[s] = sol.cost[p];
    out.absent_utility[s] = sol.utility[a];
    out.absent_cost[s] = sol.cost[a];
  }
  return out;
}

std::vector<double> stationary_distribution(const ClassChain& chain) {
  const auto& classes = chain.classes();
  std::vector<std::size_t> absorbing(classes.size());
  std::string reducible;
  for (std::size_t q = 0; q < classes.size(); ++q) {
    const auto& c = classes[q];
    absorbing[q] = c.present;
    if (c.registered == 0) continue;
    const bool no_in = c.profile.lambda <= 0;
    const bool no_out = c.profile.mu <= 0;
    if (!no_in && !no_out) continue;
    if (no_in && no_out) {
      reducible += "class " + std::to_string(q) + " is frozen at its starting count " +
                   std::to_string(c.present) + "; ";
    } else if (no_in) {
      absorbing[q] = 0;
      reducible += "class " + std::to_string(q) + " has no arrivals and is absorbed at count 0; ";
    } else {
      absorbing[q] = c.registered;
      reducible += "class " + std::to_string(q) + " has no departures and is absorbed at count " +
                   std::to_string(c.registered) + "; ";
    }
  }
  if (!reducible.empty()) throw ReducibleChainError("reducible chain: " + reducible, absorbing);

  const std::size_t ns = chain.num_states();
  std::vector<double> pi(ns, 0.0);
  if (classes.size() == 1) {
    const double lam = classes[0].profile.lambda;
    const double mu = classes[0].profile.mu;
    const std::size_t reg = classes[0].registered;
    std::vector<double> logp(ns, 0.0);
    for (std::size_t s = 0; s + 1 < ns; ++s)
      logp[s + 1] = logp[s] + std::log(static_cast<double>(reg - s) * lam) -
                    std::log(static_cast<double>(s + 1) * mu);
    const double top = *std::max_element(logp.begin(), logp.end());
    double total = 0.0;
    for (std::size_t s = 0; s < ns; ++s) total += (pi[s] = std::exp(logp[s] - top));
    for (auto& p : pi) p /= total;
    return pi;
  }

  // Global balance πQ = 0, last equation replaced by Σπ = 1.
  Triplets trip;
  const std::size_t last = ns - 1;
  for (std::size_t s = 0; s < ns; ++s) {
    double out_rate = 0.0;
    for (std::size_t q = 0; q < classes.size(); ++q) {
      const double a = chain.arrival_rate(s, q);
      const double d = chain.departure_rate(s, q);
      out_rate += a + d;
      if (a > 0 && chain.up(s, q) != last)
        trip.emplace_back(static_cast<int>(chain.up(s, q)), static_cast<int>(s), a);
      if (d > 0 && chain.down(s, q) != last)
        trip.emplace_back(static_cast<int>(chain.down(s, q)), static_cast<int>(s), d);
    }
    if (s != last) trip.emplace_back(static_cast<int>(s), static_cast<int>(s), -out_rate);
    trip.emplace_back(static_cast<int>(last), static_cast<int>(s), 1.0);
  }
  SparseMatrix a(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericError("singular balance system");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ns));
  rhs[static_cast<Eigen::Index>(last)] = 1.0;
  const Eigen::VectorXd sol = lu.solve(rhs);
  for (std::size_t s = 0; s < ns; ++s) pi[s] = std::max(sol[static_cast<Eigen::Index>(s)], 0.0);
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& p : pi) p /= total;
  return pi;
}

}  // namespace coopmine
