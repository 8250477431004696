#pragma once

#include <cmath>
#include <stdexcept>

namespace oracle {

template <typename Investment>
SubsetValues value_iteration(const std::vector<coopmine::PlayerSpec>& players, const coopmine::GameEnv& env,
                             std::size_t focal, Investment investment, double tolerance,
                             std::size_t max_sweeps) {
  const std::size_t n = players.size();
  const std::size_t states = std::size_t{1} << n;
  std::vector<double> v(states, 0.0), next(states, 0.0);
  const double payout = block_payout(players[focal], env);
  SubsetValues out;
  for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
    double delta = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      double d = env.beta;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        if (s & bit) {
          d += players[j].mu;
          acc += players[j].mu * v[s & ~bit];
        } else {
          d += players[j].lambda;
          acc += players[j].lambda * v[s | bit];
        }
      }
      double immediate = 0.0;
      if (s & (std::size_t{1} << focal)) {
        double power = env.k_l * env.l;
        for (std::size_t j = 0; j < n; ++j)
          if (s & (std::size_t{1} << j)) power += players[j].k * investment(s, j);
        const double x = investment(s, focal);
        const double share = power > 0 ? players[focal].k * x / power : 0.0;
        immediate = env.beta * share * payout - players[focal].c * x;
      }
      next[s] = (immediate + acc) / d;
      delta = std::max(delta, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (delta < tolerance) break;
  }
  if (out.sweeps > max_sweeps) throw std::runtime_error("value iteration did not converge");
  out.utility = std::move(v);
  return out;
}

}  // namespace oracle
