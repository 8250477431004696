#include "coopmine/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace coopmine {

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ValidationError({"cannot write " + path.string()});
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::string close() {
    out_.close();
    if (!out_) throw ValidationError({"failed writing " + path_.string()});
    return path_.string();
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1.0}); }

struct SolvedGame {
  std::vector<PlayerSpec> players;
  EquilibriumSolution solution;
  GameEnv env;
};

SolvedGame solve_configured(const RunConfig& cfg) {
  SolvedGame g;
  g.env = cfg.env;
  if (cfg.pools.empty()) {
    g.players = cfg.players;
    g.solution = solve_game(g.players, cfg.env);
  } else {
    auto game = pool_fixed_point(cfg.pools, cfg.env, cfg.fixed_point, cfg.players);
    g.players = std::move(game.players);
    g.solution = std::move(game.solution);
  }
  return g;
}

double network_power(const SolvedGame& g) {
  double total = g.env.l;
  for (const auto& p : g.solution.players) total += p.x_star;
  return total;
}

std::string write_equilibrium(const std::filesystem::path& dir, const SolvedGame& g) {
  CsvFile csv(dir / "equilibrium.csv", {"player_id", "x_star", "win_prob", "utility", "cost", "reward"});
  for (const auto& p : g.solution.players)
    csv.row({p.id, format_number(p.x_star), format_number(p.win_prob), format_number(p.utility),
             format_number(p.cost), format_number(p.reward)});
  return csv.close();
}

void summarize_game(const SolvedGame& g, RunReport& report) {
  const auto& ps = g.solution.players;
  const bool identical = !ps.empty() && std::all_of(ps.begin(), ps.end(), [&](const PlayerOutcome& o) {
    return near(o.x_star, ps.front().x_star) && near(o.utility, ps.front().utility);
  });
  if (identical) {
    report.summary.push_back("x* = " + fmt("%.1f", ps.front().x_star) + " kWh/min, utility = $" +
                             fmt("%.2f", ps.front().utility) + "/block");
  } else {
    for (std::size_t i = 0; i < ps.size() && i < 10; ++i)
      report.summary.push_back(ps[i].id + ": x* = " + fmt("%.1f", ps[i].x_star) + " kWh/min, utility = $" +
                               fmt("%.2f", ps[i].utility) + "/block");
    if (ps.size() > 10) report.summary.push_back("(" + std::to_string(ps.size() - 10) + " more in equilibrium.csv)");
  }
  const double power = network_power(g);
  report.summary.push_back("psi = " + fmt("%.1f", g.solution.psi) + ", network power = " + fmt("%.1f", power) +
                           " kWh/min, annual energy = " + fmt("%.0f", annual_energy_twh(power)) + " TWh");
}

std::size_t focus_index(const RunConfig& cfg) {
  if (cfg.focus_pool.empty()) return 0;
  for (std::size_t i = 0; i < cfg.pools.size(); ++i)
    if (cfg.pools[i].id == cfg.focus_pool) return i;
  throw ValidationError({"pool '" + cfg.focus_pool + "' is not defined"});
}

std::shared_ptr<const MemoryOneStrategy> make_strategy(const StrategySpec& s, const DilemmaPayoffs& pay) {
  const std::size_t n = pay.n;
  if (s.kind == "fair") {
    const double phi = std::isnan(s.phi) ? s.phi_fraction * phi_from_max_gap(pay) : s.phi;
    return std::make_shared<MemoryOneStrategy>(fair_strategy(pay, phi));
  }
  if (s.kind == "all-c") return std::make_shared<MemoryOneStrategy>(always_cooperate(n));
  if (s.kind == "all-d") return std::make_shared<MemoryOneStrategy>(always_defect(n));
  if (s.kind == "constant") return std::make_shared<MemoryOneStrategy>(constant_strategy(n, s.p, "constant"));
  if (s.kind == "repeat") {
    MemoryOneStrategy rep;
    rep.p_cooperate.assign(n, 1.0);
    rep.p_desert.assign(n, 0.0);
    rep.name = "repeat";
    return std::make_shared<MemoryOneStrategy>(std::move(rep));
  }
  throw ValidationError({"unknown strategy kind " + s.kind});
}

void apply_parameter(RunConfig& cfg, const std::string& parameter, double v) {
  auto& e = cfg.env;
  if (parameter == "env.r") e.r = v;
  else if (parameter == "env.tau") e.tau = v;
  else if (parameter == "env.beta") e.beta = v;
  else if (parameter == "env.theta") e.theta = v;
  else if (parameter == "env.l") e.l = v;
  else if (parameter == "env.k_l") e.k_l = v;
  else if (parameter.rfind("players.*.", 0) == 0) {
    const auto field = parameter.substr(10);
    for (auto& p : cfg.players) {
      if (field == "c") p.c = v;
      else if (field == "k") p.k = v;
      else if (field == "t") p.t = v;
      else if (field == "z") p.z = v;
      else throw ValidationError({"sweep parameter '" + parameter + "' does not resolve"});
    }
    for (auto& pool : cfg.pools)
      for (auto& m : pool.members) {
        if (field == "c") m.c = v;
        else if (field == "k") m.k = v;
      }
  } else if (parameter == "pools.*.t") {
    for (auto& p : cfg.pools) p.t = v;
  } else if (parameter == "pools.*.z") {
    for (auto& p : cfg.pools) p.z = v;
  } else {
    throw ValidationError({"sweep parameter '" + parameter + "' does not resolve"});
  }
  validate_env(e);
  for (const auto& p : cfg.players) validate_player(p);
}

}  // namespace

std::string format_number(double v) {
  if (v == 0) v = 0.0;  // no negative zero in output
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Network make_network(const RunConfig& cfg) {
  Network net;
  net.env = cfg.env;
  net.pools = cfg.pools;
  net.solos = cfg.players;
  net.fixed_point = cfg.fixed_point;
  net.protocol = cfg.protocol;
  net.basis = cfg.basis;
  return net;
}

SimConfig make_sim_config(const RunConfig& cfg, std::uint64_t seed) {
  if (!cfg.dilemma) throw ValidationError({"dilemma-sim needs a dilemma block"});
  const auto& d = *cfg.dilemma;
  SimConfig sim;
  sim.payoffs = d.payoffs;
  sim.iterations = d.iterations;
  sim.initial_cooperation = d.initial_cooperation;
  sim.master_seed = seed;
  sim.runs = d.runs;
  sim.error_rate = d.error_rate;
  for (const auto& s : d.strategies) sim.groups.push_back({make_strategy(s, d.payoffs), s.count});
  return sim;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  if (!cfg.sweep) throw ValidationError({"sweep needs a sweep block"});
  std::vector<SweepRow> rows;
  for (const double v : cfg.sweep->values) {
    SweepRow row;
    row.value = v;
    try {
      RunConfig changed = cfg;
      apply_parameter(changed, cfg.sweep->parameter, v);
      const auto g = solve_configured(changed);
      const double power = network_power(g);
      const auto& first = g.solution.players.front();
      for (const auto& m : cfg.sweep->metrics) {
        if (m == "network_power") row.metrics.push_back(power);
        else if (m == "psi") row.metrics.push_back(g.solution.psi);
        else if (m == "x_star") row.metrics.push_back(first.x_star);
        else if (m == "utility") row.metrics.push_back(first.utility);
        else if (m == "annual_energy_twh") row.metrics.push_back(annual_energy_twh(power));
      }
      row.status = "ok";
    } catch (const std::exception& e) {
      row.metrics.assign(cfg.sweep->metrics.size(), std::numeric_limits<double>::quiet_NaN());
      row.status = std::string("error: ") + e.what();
      std::replace(row.status.begin(), row.status.end(), ',', ';');
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RunReport run_scenario(const RunConfig& cfg, const RunOptions& options) {
  const std::filesystem::path dir(options.out_dir);
  std::filesystem::create_directories(dir);
  RunReport report;
  report.summary.push_back(std::string("scenario: ") + to_string(cfg.kind));

  switch (cfg.kind) {
    case RunKind::PoolSolve: {
      const auto g = solve_configured(cfg);
      report.files.push_back(write_equilibrium(dir, g));
      summarize_game(g, report);
      break;
    }
    case RunKind::Protocol:
    case RunKind::Shares: {
      const auto net = make_network(cfg);
      const auto result = run_pool_pipeline(net);
      const std::size_t p = focus_index(cfg);
      SolvedGame g{result.game.players, result.game.solution, cfg.env};
      report.files.push_back(write_equilibrium(dir, g));
      const auto& proto = result.protocols[p];
      if (cfg.kind == RunKind::Protocol) {
        CsvFile csv(dir / "protocol.csv", {"miner_id", "role", "investment", "utility", "cost", "roi"});
        for (const auto& m : proto.miners)
          csv.row({m.id, to_string(m.role), format_number(m.investment), format_number(m.utility),
                   format_number(m.cost), format_number(m.roi)});
        report.files.push_back(csv.close());
        report.summary.push_back("pool " + cfg.pools[p].id + ": protocol reward = " +
                                 fmt("%.2f", result.game.pool_expected_reward(p)) + ", strategic " +
                                 std::to_string(proto.strategic_connected) + " of " +
                                 std::to_string(proto.strategic_registered) + " registered, l = " +
                                 fmt("%.1f", proto.env.l) + " kWh/min");
      } else {
        const auto shares = cfg.reference
                                ? reward_shares(net.pools[p], result.game.assignments[p], proto,
                                                PoolResult{result.game.pool_outcome(p).utility,
                                                           result.game.assignments[p].total,
                                                           result.game.assignments[p].c_p},
                                                cfg.env.beta, cfg.basis, cfg.reference)
                                : result.shares[p];
        CsvFile csv(dir / "shares.csv", {"miner_id", "assigned_work", "I_cost", "I_roi", "alpha"});
        double total = 0.0;
        for (const auto& m : shares.miners) {
          csv.row({m.id, format_number(m.assigned_work), format_number(m.cost_index), format_number(m.roi_index),
                   format_number(m.alpha)});
          total += m.alpha;
        }
        report.files.push_back(csv.close());
        report.summary.push_back("pool " + cfg.pools[p].id + ": reference " + shares.reference_id +
                                 ", sum of alpha = " + fmt("%.12f", total));
      }
      break;
    }
    case RunKind::ScenarioTable: {
      const auto rows = scenario_table(make_network(cfg));
      CsvFile csv(dir / "scenario_table.csv", {"profile", "a_n1", "a_n2", "b_n1", "b_n2", "b_0", "sdp1_a",
                                               "sdp1_b", "sdp2", "sdp3"});
      for (const auto& r : rows) {
        csv.row({r.profile, format_number(r.a_n1), format_number(r.a_n2), format_number(r.b_n1),
                 format_number(r.b_n2), format_number(r.b_0), format_number(r.sdp1_a), format_number(r.sdp1_b),
                 format_number(r.sdp2), format_number(r.sdp3)});
        report.summary.push_back(r.profile + ": a/a' = " + fmt("%.9f", r.sdp1_a) + ", b/b' = " +
                                 fmt("%.9f", r.sdp1_b) + ", b/a = " + fmt("%.5f", r.sdp2) + ", a/b0 = " +
                                 fmt("%.2f", r.sdp3));
      }
      report.files.push_back(csv.close());
      break;
    }
    case RunKind::DilemmaSim: {
      const auto sim = make_sim_config(cfg, options.seed.value_or(cfg.seed));
      const auto result = batch(sim, cfg.dilemma->histogram_bins);
      CsvFile traj(dir / "trajectories.csv", {"run", "iteration", "cooperation_degree"});
      std::size_t high = 0;
      for (const auto& t : result.trajectories) {
        for (std::size_t i = 0; i < t.cooperation.size(); ++i)
          traj.row({std::to_string(t.run), std::to_string(i), format_number(t.cooperation[i])});
        if (t.cooperation.back() >= 0.95) ++high;
      }
      report.files.push_back(traj.close());
      CsvFile summary(dir / "trajectory_summary.csv", {"iteration", "mean", "q10", "q50", "q90"});
      const auto& s = result.summary;
      for (std::size_t i = 0; i < s.mean.size(); ++i)
        summary.row({std::to_string(i), format_number(s.mean[i]), format_number(s.q10[i]), format_number(s.q50[i]),
                     format_number(s.q90[i])});
      report.files.push_back(summary.close());
      report.summary.push_back(std::to_string(sim.runs) + " runs x " + std::to_string(sim.iterations) +
                               " iterations, final mean cooperation = " + fmt("%.4f", s.mean.back()) +
                               ", runs ending >= 95%: " + std::to_string(high));
      std::string hist = "final-degree histogram:";
      for (auto c : s.final_histogram) hist += " " + std::to_string(c);
      report.summary.push_back(hist);
      break;
    }
    case RunKind::Stationary: {
      const auto& st = *cfg.stationary;
      const ClassChain chain(st.classes, cfg.env.beta, st.state_cap);
      const auto pi = stationary_distribution(chain);
      CsvFile csv(dir / "stationary.csv", {"state", "probability"});
      for (std::size_t s = 0; s < pi.size(); ++s) csv.row({std::to_string(s), format_number(pi[s])});
      report.files.push_back(csv.close());
      if (st.window) {
        double mass = 0.0;
        for (std::size_t s = st.window->first; s <= st.window->second && s < pi.size(); ++s) mass += pi[s];
        report.summary.push_back("mass in [" + std::to_string(st.window->first) + ", " +
                                 std::to_string(st.window->second) + "] = " + fmt("%.6f", mass));
      }
      break;
    }
    case RunKind::Sweep: {
      const auto rows = run_sweep(cfg);
      std::vector<std::string> header{"param_value"};
      header.insert(header.end(), cfg.sweep->metrics.begin(), cfg.sweep->metrics.end());
      header.push_back("status");
      CsvFile csv(dir / "sweep.csv", header);
      std::size_t failed = 0;
      for (const auto& r : rows) {
        std::vector<std::string> cells{format_number(r.value)};
        for (double m : r.metrics) cells.push_back(format_number(m));
        cells.push_back(r.status);
        csv.row(cells);
        if (r.status != "ok") ++failed;
      }
      report.files.push_back(csv.close());
      report.summary.push_back(cfg.sweep->parameter + ": " + std::to_string(rows.size()) + " values, " +
                               std::to_string(failed) + " failed");
      break;
    }
  }
  for (const auto& f : report.files) report.summary.push_back("wrote " + f);
  return report;
}

}  // namespace coopmine
