#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "coopmine/model.hpp"

namespace fixture {

inline coopmine::GameEnv mining_env() {
  coopmine::GameEnv env;
  env.r = 6.25;
  env.tau = 10000;
  env.beta = 0.1;
  env.theta = 0.00012;
  env.l = 700000;
  env.k_l = 1;
  return env;
}

inline coopmine::PlayerSpec pool_player(const std::string& id) {
  coopmine::PlayerSpec p;
  p.id = id;
  p.c = 0.0007;
  p.k = 1;
  p.t = 2100;
  p.z = 0.005 / 60.0;
  return p;
}

inline std::vector<coopmine::PlayerSpec> ten_pools() {
  std::vector<coopmine::PlayerSpec> out;
  for (int i = 0; i < 10; ++i) out.push_back(pool_player("pool-" + std::to_string(i + 1)));
  return out;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixture
