// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. Usage: acceptance <scratch-dir>

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "coopmine/config.hpp"
#include "coopmine/equilibrium.hpp"
#include "coopmine/runner.hpp"
#include "coopmine/scenario.hpp"
#include "coopmine/simulate.hpp"
#include "coopmine/stochastic.hpp"
#include "oracles.hpp"

using namespace coopmine;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = COOPMINE_CONFIG_DIR;

// Tolerances and limits.
constexpr double kInvestmentTol = 0.1;     // kWh/min
constexpr double kUtilityTol = 0.01;       // $/block
constexpr double kRewardTol = 0.01;        // $/block
constexpr double kEnergyLow = 4000, kEnergyHigh = 4700;  // TWh/yr
constexpr double kWorkTol = 1.0;           // kWh/min
constexpr double kWindowMass = 0.999;
constexpr double kSdp3Strategic = 526.89, kSdp3Nonstrategic = 596.33, kSdp3Tol = 0.05;
constexpr double kOracleRel = 1e-4;
constexpr double kFairnessShare = 0.01;    // of the payoff range
constexpr double kMonteCarloSe = 3.0;
constexpr double kValueRel = 1e-6;

struct Verdict {
  bool pass = false;
  std::string detail;
  double limit_s = 0.0;  // 0 = no runtime bound
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

GameEnv mining_env() {
  GameEnv env;
  env.r = 6.25;
  env.tau = 10000;
  env.beta = 0.1;
  env.theta = 0.00012;
  env.l = 700000;
  env.k_l = 1;
  return env;
}

std::vector<PlayerSpec> ten_pools() {
  std::vector<PlayerSpec> out;
  for (int i = 0; i < 10; ++i) {
    PlayerSpec p;
    p.id = "pool-" + std::to_string(i + 1);
    p.c = 0.0007;
    p.k = 1;
    p.t = 2100;
    p.z = 0.005 / 60.0;
    out.push_back(p);
  }
  return out;
}

Network scenario_network() { return make_network(load_config((kConfigs / "scenario_table.json").string())); }

Verdict pool_subgame() {
  const auto pools = ten_pools();
  const auto sol = solve_game(pools, mining_env());
  double worst_x = 0, worst_u = 0;
  for (const auto& p : sol.players) {
    worst_x = std::max(worst_x, std::abs(p.x_star - 759174.7));
    worst_u = std::max(worst_u, std::abs(p.utility - 535.60));
  }
  return {worst_x <= kInvestmentTol && worst_u <= kUtilityTol,
          "x* = " + fmt("%.4f", sol.players[0].x_star) + ", U = " + fmt("%.4f", sol.players[0].utility), 1.0};
}

Verdict reward_identity() {
  const auto net = scenario_network();
  const auto game = pool_fixed_point(net.pools, net.env);
  const auto& out = game.pool_outcome(0);
  const double identity = out.utility + game.assignments[0].c_p * out.x_star / net.env.beta;
  const double reward = game.pool_expected_reward(0);
  return {std::abs(identity - 5849.82) <= kRewardTol && std::abs(reward - 5849.82) <= kRewardTol,
          "E[r] = " + fmt("%.4f", identity), 1.0};
}

Verdict annual_energy() {
  const auto env = mining_env();
  const auto sol = solve_game(ten_pools(), env);
  const double twh = annual_energy_twh(sol.total_power(env));
  return {twh >= kEnergyLow && twh <= kEnergyHigh, fmt("%.1f TWh", twh)};
}

Verdict work_distribution() {
  const auto net = scenario_network();
  const auto game = pool_fixed_point(net.pools, net.env);
  const auto& pool = net.pools[0];
  const auto& w = game.assignments[0];
  bool ok = true;
  double strategic = 0, small = 0;
  for (std::size_t i = 0; i < w.ids.size(); ++i) {
    const auto& m = *std::find_if(pool.members.begin(), pool.members.end(),
                                  [&](const PlayerSpec& p) { return p.id == w.ids[i]; });
    if (m.capacity <= 20) {
      small = w.work[i];
      ok = ok && std::abs(w.work[i] - 20) <= kWorkTol;
    } else {
      strategic = w.work[i];
      ok = ok && std::abs(w.work[i] - 1362) <= kWorkTol;
    }
  }
  return {ok, "strategic " + fmt("%.2f", strategic) + ", nonstrategic " + fmt("%.2f", small)};
}

Verdict sojourn() {
  ClassSpec cs;
  cs.profile.id = "m";
  cs.profile.c = 0.0007;
  cs.profile.lambda = 1;
  cs.profile.mu = 0.1;
  cs.registered = 600;
  cs.present = 600;
  const auto chain = ClassChain({cs}, 0.1);
  const auto pi = stationary_distribution(chain);
  double mass = 0;
  for (std::size_t s = 520; s <= 570; ++s) mass += pi[s];
  return {mass >= kWindowMass, "mass " + fmt("%.6f", mass), 1.0};
}

Verdict table_ratios() {
  const auto rows = scenario_table(scenario_network());
  bool ok = !rows.empty();
  std::string detail;
  for (const auto& r : rows) {
    const bool strategic = r.profile != "ns20";
    const double target = strategic ? kSdp3Strategic : kSdp3Nonstrategic;
    ok = ok && r.sdp1_a > 1 && r.sdp1_b > 1 && r.sdp2 > 1 && std::abs(r.sdp3 / target - 1) <= kSdp3Tol;
    detail += r.profile + " sdp1 " + fmt("%.6f", r.sdp1_a) + "/" + fmt("%.6f", r.sdp1_b) + " sdp2 " +
              fmt("%.4f", r.sdp2) + " sdp3 " + fmt("%.2f", r.sdp3) + "; ";
  }
  return {ok, detail, 60.0};
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> c(0.0004, 0.0012), k(0.5, 2.0), t(500, 3000), z(0.0, 2e-4),
      l(0, 2e6), kl(0.5, 2);
  double worst_br = 0, worst_dyn = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto env = mining_env();
    env.l = l(rng);
    env.k_l = kl(rng);
    const std::size_t n = 2 + trial % 9;
    std::vector<PlayerSpec> ps;
    for (std::size_t i = 0; i < n; ++i) {
      PlayerSpec p;
      p.id = "p" + std::to_string(i);
      p.c = c(rng);
      p.k = k(rng);
      p.t = t(rng);
      p.z = z(rng);
      ps.push_back(p);
    }
    const auto sol = solve_game(ps, env);
    for (std::size_t i = 0; i < n; ++i) {
      double others = env.k_l * env.l;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others += ps[j].k * sol.players[j].x_star;
      const double br = oracle::best_response(ps[i], others, env);
      worst_br = std::max(worst_br, std::abs(br - sol.players[i].x_star) / std::max(sol.players[i].x_star, 1.0));
    }
    const auto x = oracle::best_response_dynamics(ps, env, std::vector<double>(n, 1000.0));
    for (std::size_t i = 0; i < n; ++i)
      worst_dyn = std::max(worst_dyn, std::abs(x[i] - sol.players[i].x_star) / std::max(sol.players[i].x_star, 1.0));
  }
  return {worst_br <= kOracleRel && worst_dyn <= kOracleRel,
          "best response " + fmt("%.2e", worst_br) + ", dynamics " + fmt("%.2e", worst_dyn), 60.0};
}

std::shared_ptr<const MemoryOneStrategy> share(MemoryOneStrategy s) {
  return std::make_shared<const MemoryOneStrategy>(std::move(s));
}

Verdict fairness() {
  const std::size_t n = 10;
  const auto pay = build_payoffs(35, 0.04, 70, 0.05, n);
  const double range = 70 - 0.04;
  const auto fair = share(fair_strategy(pay, phi_from_max_gap(pay)));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  auto mixed = [&] {
    MemoryOneStrategy s;
    for (std::size_t j = 0; j < n; ++j) {
      s.p_cooperate.push_back(u(rng));
      s.p_desert.push_back(u(rng));
    }
    return share(s);
  };
  std::vector<std::pair<std::string, std::vector<StrategyGroup>>> opponents{
      {"all-d", {{share(always_defect(n)), n - 1}}},
      {"all-c", {{share(always_cooperate(n)), n - 1}}},
      {"constant 0.5", {{share(constant_strategy(n, 0.5, "half")), n - 1}}},
      {"mixed", {{mixed(), 3}, {mixed(), 3}, {mixed(), 3}}},
      {"all-d and all-c", {{share(always_defect(n)), 4}, {share(always_cooperate(n)), 5}}},
  };
  double worst = 0;
  std::string detail;
  for (const auto& [name, groups] : opponents) {
    SimConfig c;
    c.payoffs = pay;
    c.iterations = 100000;
    c.initial_cooperation = 0.5;
    c.groups = {{fair, 1}};
    c.groups.insert(c.groups.end(), groups.begin(), groups.end());
    c.master_seed = 7;
    const double d = fairness_deviation(run(c), 0) / range;
    worst = std::max(worst, d);
    detail += name + " " + fmt("%.2e", d) + "; ";
  }
  return {worst < kFairnessShare, detail, 60.0};
}

Verdict dilemma_dynamics() {
  std::vector<double> finals[4];
  const char* names[4] = {"dilemma_a", "dilemma_b", "dilemma_c", "dilemma_d"};
  for (int i = 0; i < 4; ++i) {
    const auto cfg = load_config((kConfigs / (std::string(names[i]) + ".json")).string());
    const auto result = batch(make_sim_config(cfg, cfg.seed));
    for (const auto& t : result.trajectories) finals[i].push_back(t.cooperation.back());
  }
  std::size_t high_a = 0;
  for (double f : finals[0]) high_a += f >= 0.95;
  bool d_ok = true;
  double d_lo = 1, d_hi = 0;
  for (double f : finals[3]) {
    d_ok = d_ok && std::abs(f - 0.60) <= 0.05;
    d_lo = std::min(d_lo, f);
    d_hi = std::max(d_hi, f);
  }
  auto spread = [](const std::vector<double>& v, double ic, std::size_t& up, std::size_t& down) {
    up = down = 0;
    for (double f : v) {
      up += f > ic;
      down += f < ic;
    }
    return up > 0 && down > 0;
  };
  std::size_t bu, bd, cu, cd;
  const bool b_ok = spread(finals[1], 0.98, bu, bd);
  const bool c_ok = spread(finals[2], 0.80, cu, cd);
  const bool a_ok = high_a >= 90;
  std::ostringstream os;
  os << "(a) " << high_a << "/100 >= 0.95; (b) " << bu << " up " << bd << " down; (c) " << cu << " up " << cd
     << " down; (d) finals in [" << fmt("%.4f", d_lo) << ", " << fmt("%.4f", d_hi) << "]";
  return {a_ok && b_ok && c_ok && d_ok, os.str(), 600.0};
}

Verdict small_exactness() {
  // Simulation against the exact profile chain.
  const std::size_t n = 3;
  const auto pay = build_payoffs(35, 0.04, 70, 0.05, n);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::vector<MemoryOneStrategy> strategies(n);
  for (auto& s : strategies)
    for (std::size_t j = 0; j < n; ++j) {
      s.p_cooperate.push_back(u(rng));
      s.p_desert.push_back(u(rng));
    }
  SimConfig c;
  c.payoffs = pay;
  c.iterations = 20000;
  c.initial_cooperation = 1.0 / 3;
  for (const auto& s : strategies) c.groups.push_back({share(s), 1});
  c.record_profiles = true;
  c.master_seed = 41;
  c.runs = 40;
  std::vector<const MemoryOneStrategy*> agents;
  for (const auto& s : strategies) agents.push_back(&s);
  const auto pi = oracle::profile_stationary(pay, agents);
  const auto result = batch(c);
  double worst_z = 0;
  for (std::size_t prof = 0; prof < pi.size(); ++prof) {
    double sum = 0, sq = 0;
    for (const auto& t : result.trajectories) {
      const double f = static_cast<double>(t.profile_counts[prof]) / static_cast<double>(c.iterations);
      sum += f;
      sq += f * f;
    }
    const double runs = static_cast<double>(c.runs);
    const double mean = sum / runs;
    const double se = std::sqrt(std::max(sq / runs - mean * mean, 0.0) / (runs - 1));
    worst_z = std::max(worst_z, std::abs(mean - pi[prof]) / se);
  }

  // Stochastic values against value iteration over subsets.
  GameEnv env;
  env.r = 5849.82;
  env.tau = 1;
  env.beta = 0.1;
  env.l = 200;
  std::vector<ClassSpec> classes(2);
  classes[0].profile.id = "a";
  classes[0].profile.c = 0.0007;
  classes[0].profile.lambda = 0.4;
  classes[0].profile.mu = 0.2;
  classes[0].registered = classes[0].present = 1;
  classes[1].profile.id = "b";
  classes[1].profile.c = 0.0009;
  classes[1].profile.lambda = 0.9;
  classes[1].profile.mu = 0.6;
  classes[1].registered = 2;
  classes[1].present = 1;
  const auto chain = build_chain(classes, env);
  const auto strategy = mpe_strategy(chain, env);
  std::vector<PlayerSpec> players{chain.classes()[0].profile, chain.classes()[1].profile,
                                  chain.classes()[1].profile};
  auto state_of = [&](std::size_t mask) {
    const std::vector<std::size_t> k{mask & 1u, ((mask >> 1) & 1u) + ((mask >> 2) & 1u)};
    return chain.index(k);
  };
  auto investment = [&](std::size_t mask, std::size_t j) { return strategy.x(state_of(mask), j == 0 ? 0 : 1); };
  double worst_rel = 0;
  for (std::size_t cls = 0; cls < 2; ++cls) {
    const std::size_t focal = cls == 0 ? 0 : 1;
    const auto values = class_values(chain, strategy, env, cls);
    const auto vi = oracle::value_iteration(players, env, focal, investment);
    for (std::size_t mask = 0; mask < 8; ++mask) {
      const std::size_t s = state_of(mask);
      const double mine = (mask >> focal) & 1u ? values.present_utility[s] : values.absent_utility[s];
      worst_rel = std::max(worst_rel, std::abs(mine - vi.utility[mask]) / std::max(std::abs(vi.utility[mask]), 1e-300));
    }
  }
  return {worst_z <= kMonteCarloSe && worst_rel <= kValueRel,
          "largest frequency gap " + fmt("%.2f", worst_z) + " SE, value gap " + fmt("%.2e", worst_rel)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict determinism(const fs::path& scratch) {
  std::size_t compared = 0;
  std::string mismatch;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    const auto cfg = load_config(entry.path().string());
    const auto stem = entry.path().stem().string();
    std::vector<fs::path> dirs;
    for (int threads : {1, 8, 8}) {
      omp_set_num_threads(threads);
      const auto dir = scratch / (stem + "-" + std::to_string(dirs.size()));
      fs::remove_all(dir);
      run_scenario(cfg, {dir.string(), std::nullopt});
      dirs.push_back(dir);
    }
    for (const auto& f : fs::directory_iterator(dirs[0])) {
      const auto name = f.path().filename();
      const auto ref = slurp(f.path());
      for (std::size_t i = 1; i < dirs.size(); ++i) {
        ++compared;
        if (slurp(dirs[i] / name) != ref) mismatch += stem + "/" + name.string() + " ";
      }
    }
  }
  omp_set_num_threads(1);
  return {mismatch.empty() && compared > 0,
          std::to_string(compared) + " file comparisons" + (mismatch.empty() ? "" : ", differing: " + mismatch)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "coopmine-acceptance";
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"pool sub-game investment and utility", pool_subgame},
      {"pool reward identity", reward_identity},
      {"annual network energy", annual_energy},
      {"work distribution inside a pool", work_distribution},
      {"occupancy of 600 registered miners", sojourn},
      {"dilemma ratios of the scenario table", table_ratios},
      {"closed form against best-response oracle", oracle_equivalence},
      {"fair strategy equalizes utilities", fairness},
      {"cooperation dynamics of 10000 agents", dilemma_dynamics},
      {"small instances against exact chains", small_exactness},
      {"byte-identical output across thread counts", [&] { return determinism(scratch); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = v.limit_s <= 0 || secs < v.limit_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("criterion %2zu: %s  %s  [%s] (%.2f s%s)\n", i + 1, pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                v.detail.c_str(), secs, in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  return failed;
}
