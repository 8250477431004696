#include "coopmine/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coopmine {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& s : issues) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

bool subset_of(std::vector<std::string> inner, std::vector<std::string> outer) {
  std::sort(inner.begin(), inner.end());
  std::sort(outer.begin(), outer.end());
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

bool GameState::consistent() const {
  return subset_of(active, present) && subset_of(present, registered);
}

GameEnv validate_env(const GameEnv& env) {
  std::vector<std::string> issues;
  auto finite = [&](double v, const char* name) {
    if (!std::isfinite(v)) issues.push_back(std::string(name) + " must be finite");
    return std::isfinite(v);
  };
  if (finite(env.r, "r") && env.r < 0) issues.emplace_back("r must be non-negative");
  if (finite(env.tau, "tau") && env.tau <= 0) issues.emplace_back("tau must be positive");
  if (finite(env.beta, "beta") && env.beta <= 0) issues.emplace_back("beta must be positive");
  if (finite(env.theta, "theta") && env.theta < 0) issues.emplace_back("theta must be non-negative");
  if (finite(env.l, "l") && env.l < 0) issues.emplace_back("l must be non-negative");
  if (finite(env.k_l, "k_l") && env.k_l <= 0) issues.emplace_back("k_l must be positive");
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return env;
}

std::vector<std::string> player_issues(const PlayerSpec& p, const std::string& context) {
  std::vector<std::string> issues;
  const std::string who = context.empty() ? (p.id.empty() ? std::string("player") : p.id) : context;
  auto check = [&](bool ok, const char* msg) {
    if (!ok) issues.push_back(who + "." + msg);
  };
  check(std::isfinite(p.c) && p.c >= 0, "c must be non-negative");
  check(std::isfinite(p.k) && p.k > 0, "k must be positive");
  check(std::isfinite(p.t) && p.t >= 0, "t must be non-negative");
  check(std::isfinite(p.z) && p.z >= 0, "z must be non-negative");
  check(std::isfinite(p.lambda) && p.lambda >= 0, "lambda must be non-negative");
  check(std::isfinite(p.mu) && p.mu >= 0, "mu must be non-negative");
  check(!std::isnan(p.capacity) && p.capacity >= 0, "capacity must be non-negative");
  return issues;
}

PlayerSpec validate_player(const PlayerSpec& p) {
  auto issues = player_issues(p);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return p;
}

double block_value(const PlayerSpec& p, const GameEnv& env) {
  return (env.r + env.theta * p.t) * std::exp(-env.beta * p.z * p.t);
}

double effective_reward(const PlayerSpec& p, const GameEnv& env) {
  return env.tau * block_value(p, env);
}

}  // namespace coopmine
