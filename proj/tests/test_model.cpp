#include <doctest.h>

#include "common.hpp"
#include "coopmine/model.hpp"

using namespace coopmine;

TEST_CASE("mining parameter set validates") {
  CHECK_NOTHROW(validate_env(fixture::mining_env()));
  auto env = fixture::mining_env();
  env.l = 0;
  CHECK_NOTHROW(validate_env(env));
}

TEST_CASE("zero resolution rate is rejected by name") {
  auto env = fixture::mining_env();
  env.beta = 0;
  try {
    validate_env(env);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0] == "beta must be positive");
  }
}

TEST_CASE("every violated env field is reported") {
  GameEnv env;
  env.r = -1;
  env.tau = 0;
  env.beta = -2;
  env.theta = -1;
  env.l = -5;
  env.k_l = 0;
  try {
    validate_env(env);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.issues().size() == 6);
  }
}

TEST_CASE("player issues name the field") {
  PlayerSpec p;
  p.id = "m1";
  p.c = -1;
  p.k = 0;
  p.capacity = -3;
  const auto issues = player_issues(p);
  REQUIRE(issues.size() == 3);
  CHECK(issues[0] == "m1.c must be non-negative");
  CHECK(issues[1] == "m1.k must be positive");
  CHECK(issues[2] == "m1.capacity must be non-negative");
  CHECK(player_issues(p, "players[4]")[0] == "players[4].c must be non-negative");
}

TEST_CASE("effective reward of the mining parameter set") {
  const auto env = fixture::mining_env();
  const auto p = fixture::pool_player("p");
  CHECK(effective_reward(p, env) == doctest::Approx(63892.05).epsilon(0.5 / 63892.05));
  // The reported expected reward divided by the equilibrium win probability.
  const double from_reported = 5849.82 / (759174.7 / 8291747.0);
  CHECK(effective_reward(p, env) == doctest::Approx(from_reported).epsilon(0.5 / 63892.05));
}

TEST_CASE("orphan and fee terms vanish") {
  auto env = fixture::mining_env();
  auto p = fixture::pool_player("p");
  env.theta = 0;
  p.z = 0;
  CHECK(effective_reward(p, env) == env.tau * env.r);
  env = fixture::mining_env();
  p = fixture::pool_player("p");
  p.t = 0;
  CHECK(effective_reward(p, env) == env.tau * env.r);
}

TEST_CASE("effective reward monotonicity") {
  const auto env = fixture::mining_env();
  const auto p = fixture::pool_player("p");
  const double base = effective_reward(p, env);
  auto q = p;
  q.z *= 2;
  CHECK(effective_reward(q, env) < base);
  auto e2 = env;
  e2.beta *= 2;
  CHECK(effective_reward(p, e2) < base);
  e2 = env;
  e2.tau *= 2;
  CHECK(effective_reward(p, e2) > base);
  e2 = env;
  e2.r *= 2;
  CHECK(effective_reward(p, e2) > base);
}

TEST_CASE("block size maximizing the effective reward") {
  const auto env = fixture::mining_env();
  auto p = fixture::pool_player("p");
  const double t_star = 1.0 / (env.beta * p.z) - env.r / env.theta;
  const auto at = [&](double t) {
    p.t = t;
    return effective_reward(p, env);
  };
  const double lo = std::floor(t_star), hi = std::ceil(t_star);
  for (double t = lo - 50; t < lo; t += 1) CHECK(at(t + 1) > at(t));
  for (double t = hi; t < hi + 50; t += 1) CHECK(at(t + 1) < at(t));
  CHECK(std::max(at(lo), at(hi)) >= at(lo - 1));
  CHECK(std::max(at(lo), at(hi)) >= at(hi + 1));
}

TEST_CASE("state sets nest") {
  GameState s;
  s.registered = {"a", "b", "c"};
  s.present = {"a", "b"};
  s.active = {"b"};
  CHECK(s.consistent());
  s.active = {"c"};
  CHECK_FALSE(s.consistent());
}
