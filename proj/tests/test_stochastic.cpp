#include <doctest.h>

#include <numeric>

#include "common.hpp"
#include "coopmine/equilibrium.hpp"
#include "coopmine/stochastic.hpp"
#include "oracles.hpp"

using namespace coopmine;

namespace {

ClassSpec miners(std::size_t registered, std::size_t present, double lambda, double mu, double c = 0.0007,
                 const std::string& id = "m") {
  ClassSpec cs;
  cs.profile.id = id;
  cs.profile.c = c;
  cs.profile.lambda = lambda;
  cs.profile.mu = mu;
  cs.registered = registered;
  cs.present = present;
  return cs;
}

GameEnv protocol_env(double l = 10000) {
  GameEnv env;
  env.r = 5849.82;
  env.tau = 1;
  env.beta = 0.1;
  env.l = l;
  return env;
}

}  // namespace

TEST_CASE("single-class chain of 600 registered miners") {
  const auto chain = build_chain({miners(600, 550, 1, 0.1)}, protocol_env());
  CHECK(chain.num_states() == 601);
  for (std::size_t s : {0u, 1u, 300u, 600u}) {
    CHECK(chain.arrival_rate(s, 0) == doctest::Approx(600.0 - static_cast<double>(s)));
    CHECK(chain.departure_rate(s, 0) == doctest::Approx(0.1 * static_cast<double>(s)));
  }
  CHECK(chain.initial_state() == 550);
}

TEST_CASE("frozen chain leaves only the resolution rate") {
  const auto chain = build_chain({miners(5, 5, 0, 0)}, protocol_env());
  CHECK(chain.total_rate(chain.initial_state()) == 0.1);
}

TEST_CASE("two classes of two") {
  const auto chain = build_chain({miners(2, 1, 1, 0.5, 0.0007, "a"), miners(2, 2, 2, 0.25, 0.0008, "b")},
                                 protocol_env());
  CHECK(chain.num_states() == 9);
  for (std::size_t s = 0; s < 9; ++s) {
    const auto c = chain.counts(s);
    CHECK(chain.index(c) == s);
    const double expected = 0.1 + (2.0 - c[0]) * 1 + c[0] * 0.5 + (2.0 - c[1]) * 2 + c[1] * 0.25;
    CHECK(chain.total_rate(s) == doctest::Approx(expected));
    // Transition probabilities out of s sum to one.
    double p = 0.1 / chain.total_rate(s);
    for (std::size_t q = 0; q < 2; ++q) p += (chain.arrival_rate(s, q) + chain.departure_rate(s, q)) / chain.total_rate(s);
    CHECK(p == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(chain.initial_state() == chain.index(std::vector<std::size_t>{1, 2}));
}

TEST_CASE("state cap is enforced") {
  CHECK_THROWS_AS(build_chain({miners(1000, 0, 1, 1), miners(1000, 0, 1, 1)}, protocol_env(), 1000),
                  ValidationError);
}

TEST_CASE("static chain collapses to the closed form") {
  const auto env = protocol_env();
  const auto chain = build_chain({miners(4, 4, 0, 0)}, env);
  const auto strategy = mpe_strategy(chain, env);
  const auto table = expected_utilities(chain, strategy, env);
  std::vector<PlayerSpec> players(4, chain.classes()[0].profile);
  for (std::size_t i = 0; i < 4; ++i) players[i].id = "m" + std::to_string(i);
  const auto sol = equilibrium_strategy(players, env);
  CHECK(table.by_class[0].present_utility[4] == doctest::Approx(sol.players[0].utility).epsilon(1e-12));
  CHECK(table.by_class[0].present_cost[4] == doctest::Approx(sol.players[0].cost).epsilon(1e-12));
}

TEST_CASE("three-state chain matches value iteration") {
  const auto env = protocol_env(50);
  const auto chain = build_chain({miners(2, 2, 0.7, 0.3)}, env);
  const auto strategy = mpe_strategy(chain, env);
  const auto values = class_values(chain, strategy, env, 0);
  std::vector<PlayerSpec> players(2, chain.classes()[0].profile);
  const auto vi = oracle::value_iteration(players, env, 0, [&](std::size_t mask, std::size_t) {
    return strategy.x(static_cast<std::size_t>(__builtin_popcountll(mask)), 0);
  });
  // Subset masks: focal is bit 0.
  CHECK(values.present_utility[2] == doctest::Approx(vi.utility[0b11]).epsilon(1e-9));
  CHECK(values.present_utility[1] == doctest::Approx(vi.utility[0b01]).epsilon(1e-9));
  CHECK(values.absent_utility[1] == doctest::Approx(vi.utility[0b10]).epsilon(1e-9));
  CHECK(values.absent_utility[0] == doctest::Approx(vi.utility[0b00]).epsilon(1e-9));
}

TEST_CASE("two-class chain matches value iteration over subsets") {
  const auto env = protocol_env(200);
  const auto chain = build_chain({miners(1, 1, 0.4, 0.2, 0.0007, "a"), miners(2, 1, 0.9, 0.6, 0.0009, "b")}, env);
  const auto strategy = mpe_strategy(chain, env);
  // Player 0 is class a, players 1 and 2 are class b.
  std::vector<PlayerSpec> players{chain.classes()[0].profile, chain.classes()[1].profile, chain.classes()[1].profile};
  auto state_of = [&](std::size_t mask) {
    const std::vector<std::size_t> c{mask & 1u, ((mask >> 1) & 1u) + ((mask >> 2) & 1u)};
    return chain.index(c);
  };
  auto investment = [&](std::size_t mask, std::size_t j) { return strategy.x(state_of(mask), j == 0 ? 0 : 1); };
  const auto a_vals = class_values(chain, strategy, env, 0);
  const auto vi_a = oracle::value_iteration(players, env, 0, investment);
  const auto b_vals = class_values(chain, strategy, env, 1);
  const auto vi_b = oracle::value_iteration(players, env, 1, investment);
  for (std::size_t mask = 0; mask < 8; ++mask) {
    const std::size_t s = state_of(mask);
    if (mask & 1u) CHECK(a_vals.present_utility[s] == doctest::Approx(vi_a.utility[mask]).epsilon(1e-9));
    else CHECK(a_vals.absent_utility[s] == doctest::Approx(vi_a.utility[mask]).epsilon(1e-9));
    if (mask & 2u) CHECK(b_vals.present_utility[s] == doctest::Approx(vi_b.utility[mask]).epsilon(1e-9));
    else CHECK(b_vals.absent_utility[s] == doctest::Approx(vi_b.utility[mask]).epsilon(1e-9));
  }
}

TEST_CASE("vanishing rates approach the static solution") {
  const auto env = protocol_env();
  const auto frozen = build_chain({miners(6, 6, 0, 0)}, env);
  const auto slow = build_chain({miners(6, 6, 1e-9, 1e-9)}, env);
  const double u0 = class_values(frozen, mpe_strategy(frozen, env), env, 0).present_utility[6];
  const double u1 = class_values(slow, mpe_strategy(slow, env), env, 0).present_utility[6];
  CHECK(u1 == doctest::Approx(u0).epsilon(1e-6));
}

TEST_CASE("fixed investment focal in a static chain") {
  const auto env = protocol_env();
  const auto chain = build_chain({miners(3, 3, 0, 0)}, env);
  const auto strategy = mpe_strategy(chain, env);
  PlayerSpec focal;
  focal.id = "n";
  focal.c = 0.0007;
  const auto v = fixed_investment_values(chain, strategy, env, focal, 20);
  const double power = env.l + 3 * strategy.x(3, 0);
  const double expected = 20 / power * env.r - focal.c * 20 / env.beta;
  CHECK(v.present_utility[3] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(v.absent_utility[3] == 0.0);
}

TEST_CASE("occupancy of 600 registered miners") {
  const auto chain = build_chain({miners(600, 550, 1, 0.1)}, protocol_env());
  const auto pi = stationary_distribution(chain);
  CHECK(std::accumulate(pi.begin(), pi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  double window = 0.0;
  for (std::size_t s = 520; s <= 570; ++s) window += pi[s];
  CHECK(window >= 0.999);
  for (std::size_t s = 0; s + 1 < pi.size(); ++s) {
    if (pi[s] < 1e-280) continue;
    const double lhs = pi[s] * (600.0 - static_cast<double>(s)) * 1.0;
    const double rhs = pi[s + 1] * static_cast<double>(s + 1) * 0.1;
    CHECK(fixture::rel(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("absorbing chain takes the error path") {
  const auto chain = build_chain({miners(5, 5, 0, 0.1)}, protocol_env());
  try {
    stationary_distribution(chain);
    FAIL("expected a reducible chain");
  } catch (const ReducibleChainError& e) {
    REQUIRE(e.absorbing_counts().size() == 1);
    CHECK(e.absorbing_counts()[0] == 0);
  }
}

TEST_CASE("stationary laws match power iteration") {
  const auto small = build_chain({miners(2, 0, 0.3, 0.8)}, protocol_env());
  const auto pi = stationary_distribution(small);
  const auto ref = oracle::power_iteration_stationary(small);
  for (std::size_t s = 0; s < 3; ++s) CHECK(pi[s] == doctest::Approx(ref[s]).epsilon(1e-9));

  const auto multi = build_chain({miners(3, 0, 0.5, 0.2, 0.0007, "a"), miners(2, 1, 0.1, 0.7, 0.0007, "b")},
                                 protocol_env());
  const auto pm = stationary_distribution(multi);
  const auto rm = oracle::power_iteration_stationary(multi);
  for (std::size_t s = 0; s < multi.num_states(); ++s) CHECK(pm[s] == doctest::Approx(rm[s]).epsilon(1e-9));
}
