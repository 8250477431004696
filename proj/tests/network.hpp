#pragma once

#include "common.hpp"
#include "coopmine/pool.hpp"
#include "coopmine/scenario.hpp"

namespace fixture {

inline coopmine::PlayerSpec miner(const std::string& id, const std::string& profile, double capacity) {
  coopmine::PlayerSpec m;
  m.id = id;
  m.profile = profile;
  m.c = 0.0007;
  m.k = 1;
  m.lambda = 1;
  m.mu = 0.1;
  m.capacity = capacity;
  return m;
}

/// 500 small nonstrategic miners, 550 connected strategic miners of three
/// capacities and 50 disconnected strategic miners.
inline coopmine::PoolSpec mining_pool(const std::string& id) {
  coopmine::PoolSpec pool;
  pool.id = id;
  pool.t = 2100;
  pool.z = 0.005 / 60.0;
  auto add = [&](int n, double cap, const std::string& prof, bool connected) {
    for (int i = 0; i < n; ++i) {
      pool.members.push_back(miner(id + "/" + prof + (connected ? "-" : "-off-") + std::to_string(i + 1), prof, cap));
      pool.connected.push_back(connected);
    }
  };
  add(500, 20, "ns20", true);
  add(300, 2000, "s2000", true);
  add(200, 3000, "s3000", true);
  add(50, 5000, "s5000", true);
  add(50, 2000, "s2000", false);
  return pool;
}

inline coopmine::Network mining_network() {
  coopmine::Network net;
  net.env = mining_env();
  for (int p = 0; p < 10; ++p) net.pools.push_back(mining_pool("pool-" + std::to_string(p + 1)));
  return net;
}

}  // namespace fixture
