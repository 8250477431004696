#include "coopmine/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace coopmine {

namespace {

using json = nlohmann::json;

class Reader {
 public:
  std::vector<std::string> issues;

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      issues.push_back(path + " must be an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        issues.push_back("unknown key '" + key + "' in " + path);
    }
    return true;
  }

  double number(const json& j, const char* key, const std::string& path, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) {
      issues.push_back(path + "." + key + " must be a number");
      return fallback;
    }
    return v.get<double>();
  }

  std::optional<double> required_number(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) {
      issues.push_back(path + "." + key + " is required");
      return std::nullopt;
    }
    const double v = number(j, key, path, std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(v)) return std::nullopt;
    return v;
  }

  std::size_t count(const json& j, const char* key, const std::string& path, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned()) {
      issues.push_back(path + "." + key + " must be a non-negative integer");
      return fallback;
    }
    return v.get<std::size_t>();
  }

  std::string text(const json& j, const char* key, const std::string& path, std::string fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_string()) {
      issues.push_back(path + "." + key + " must be a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  bool flag(const json& j, const char* key, const std::string& path, bool fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean()) {
      issues.push_back(path + "." + key + " must be true or false");
      return fallback;
    }
    return v.get<bool>();
  }

  const json* array(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return nullptr;
    if (!j.at(key).is_array()) {
      issues.push_back(path + "." + key + " must be a list");
      return nullptr;
    }
    return &j.at(key);
  }
};

std::string numbered(const std::string& id, std::size_t i, std::size_t count) {
  return count > 1 ? id + "-" + std::to_string(i + 1) : id;
}

// Shared economics of a player or pool member block.
PlayerSpec read_economics(Reader& r, const json& j, const std::string& path) {
  PlayerSpec p;
  p.id = r.text(j, "id", path, "");
  if (p.id.empty()) r.issues.push_back(path + ".id is required");
  if (auto c = r.required_number(j, "c", path)) p.c = *c;
  p.k = r.number(j, "k", path, 1.0);
  p.t = r.number(j, "t", path, 0.0);
  p.z = r.number(j, "z", path, 0.0);
  p.lambda = r.number(j, "lambda", path, 0.0);
  p.mu = r.number(j, "mu", path, 0.0);
  p.capacity = r.number(j, "capacity", path, std::numeric_limits<double>::infinity());
  p.profile = r.text(j, "profile", path, "");
  for (auto& issue : player_issues(p, path)) r.issues.push_back(std::move(issue));
  if (p.c == 0) r.issues.push_back(path + ".c must be positive");
  return p;
}

std::vector<PlayerSpec> read_players(Reader& r, const json& list, const std::string& path) {
  std::vector<PlayerSpec> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!r.object(list[i], at, {"id", "c", "k", "t", "z", "lambda", "mu", "capacity", "profile", "count"})) continue;
    const PlayerSpec base = read_economics(r, list[i], at);
    const std::size_t n = r.count(list[i], "count", at, 1);
    for (std::size_t k = 0; k < n; ++k) {
      PlayerSpec p = base;
      p.id = numbered(base.id, k, n);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<PoolSpec> read_pools(Reader& r, const json& list, const std::string& path) {
  std::vector<PoolSpec> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!r.object(list[i], at, {"id", "t", "z", "count", "members"})) continue;
    PoolSpec base;
    base.id = r.text(list[i], "id", at, "");
    if (base.id.empty()) r.issues.push_back(at + ".id is required");
    base.t = r.number(list[i], "t", at, 0.0);
    base.z = r.number(list[i], "z", at, 0.0);
    if (!(base.t >= 0)) r.issues.push_back(at + ".t must be non-negative");
    if (!(base.z >= 0)) r.issues.push_back(at + ".z must be non-negative");
    std::vector<std::pair<PlayerSpec, std::pair<std::size_t, bool>>> blocks;
    if (const json* members = r.array(list[i], "members", at)) {
      for (std::size_t m = 0; m < members->size(); ++m) {
        const std::string mat = at + ".members[" + std::to_string(m) + "]";
        if (!r.object((*members)[m], mat, {"id", "c", "k", "lambda", "mu", "capacity", "profile", "count", "connected"})) continue;
        PlayerSpec p = read_economics(r, (*members)[m], mat);
        if (p.profile.empty()) p.profile = p.id;
        blocks.push_back({p, {r.count((*members)[m], "count", mat, 1), r.flag((*members)[m], "connected", mat, true)}});
      }
    } else {
      r.issues.push_back(at + ".members is required");
    }
    const std::size_t copies = r.count(list[i], "count", at, 1);
    for (std::size_t k = 0; k < copies; ++k) {
      PoolSpec pool = base;
      pool.id = numbered(base.id, k, copies);
      for (const auto& [spec, extra] : blocks) {
        for (std::size_t c = 0; c < extra.first; ++c) {
          PlayerSpec p = spec;
          p.id = pool.id + "/" + numbered(spec.id, c, extra.first);
          pool.members.push_back(std::move(p));
          pool.connected.push_back(extra.second);
        }
      }
      out.push_back(std::move(pool));
    }
  }
  return out;
}

DilemmaPayoffs read_payoffs(Reader& r, const json& j, const std::string& path) {
  DilemmaPayoffs p;
  if (!r.object(j, path, {"n", "a_top", "a_bottom", "b_top", "b_bottom", "a", "b"})) return p;
  if (j.contains("a") || j.contains("b")) {
    const json* a = r.array(j, "a", path);
    const json* b = r.array(j, "b", path);
    if (!a || !b) {
      r.issues.push_back(path + " needs both a and b lists");
      return p;
    }
    try {
      p.a = a->get<std::vector<double>>();
      p.b = b->get<std::vector<double>>();
    } catch (const json::exception&) {
      r.issues.push_back(path + ".a and .b must hold numbers");
      return p;
    }
    p.n = p.a.size();
    for (auto& issue : dilemma_violations(p)) r.issues.push_back(path + ": " + issue);
    return p;
  }
  const auto n = r.count(j, "n", path, 0);
  const auto at = r.required_number(j, "a_top", path);
  const auto ab = r.required_number(j, "a_bottom", path);
  const auto bt = r.required_number(j, "b_top", path);
  const auto bb = r.required_number(j, "b_bottom", path);
  if (n < 2) r.issues.push_back(path + ".n must be at least 2");
  if (!at || !ab || !bt || !bb || n < 2) return p;
  try {
    return build_payoffs(*at, *ab, *bt, *bb, n);
  } catch (const ValidationError& e) {
    for (const auto& issue : e.issues()) r.issues.push_back(path + ": " + issue);
  }
  return p;
}

DilemmaSpec read_dilemma(Reader& r, const json& j, const std::string& path) {
  DilemmaSpec d;
  if (!r.object(j, path, {"payoffs", "iterations", "initial_cooperation", "runs", "error_rate", "histogram_bins", "strategies"}))
    return d;
  if (j.contains("payoffs")) d.payoffs = read_payoffs(r, j.at("payoffs"), path + ".payoffs");
  else r.issues.push_back(path + ".payoffs is required");
  d.iterations = r.count(j, "iterations", path, d.iterations);
  d.initial_cooperation = r.number(j, "initial_cooperation", path, d.initial_cooperation);
  d.runs = r.count(j, "runs", path, d.runs);
  d.error_rate = r.number(j, "error_rate", path, d.error_rate);
  d.histogram_bins = r.count(j, "histogram_bins", path, d.histogram_bins);
  if (d.iterations < 1) r.issues.push_back(path + ".iterations must be at least 1");
  if (d.runs < 1) r.issues.push_back(path + ".runs must be at least 1");
  if (!(d.initial_cooperation >= 0 && d.initial_cooperation <= 1))
    r.issues.push_back(path + ".initial_cooperation must lie in [0, 1]");
  if (!(d.error_rate >= 0 && d.error_rate <= 1)) r.issues.push_back(path + ".error_rate must lie in [0, 1]");
  if (d.histogram_bins < 1) r.issues.push_back(path + ".histogram_bins must be at least 1");

  const json* list = r.array(j, "strategies", path);
  if (!list || list->empty()) {
    r.issues.push_back(path + ".strategies needs at least one entry");
    return d;
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const std::string at = path + ".strategies[" + std::to_string(i) + "]";
    const json& s = (*list)[i];
    if (!r.object(s, at, {"kind", "phi", "phi_fraction", "p", "count"})) continue;
    StrategySpec spec;
    spec.kind = r.text(s, "kind", at, "");
    spec.phi = r.number(s, "phi", at, spec.phi);
    spec.phi_fraction = r.number(s, "phi_fraction", at, spec.phi_fraction);
    spec.p = r.number(s, "p", at, spec.p);
    spec.count = r.count(s, "count", at, 0);
    if (!s.contains("count")) spec.count = d.payoffs.n > total ? d.payoffs.n - total : 0;
    total += spec.count;
    if (spec.kind == "fair") {
      if (std::isnan(spec.phi) == std::isnan(spec.phi_fraction))
        r.issues.push_back(at + " needs exactly one of phi and phi_fraction");
    } else if (spec.kind == "constant") {
      if (!(spec.p >= 0 && spec.p <= 1)) r.issues.push_back(at + ".p must lie in [0, 1]");
    } else if (spec.kind != "all-c" && spec.kind != "all-d" && spec.kind != "repeat") {
      r.issues.push_back(at + ".kind must be one of fair, all-c, all-d, repeat, constant");
    }
    d.strategies.push_back(spec);
  }
  if (d.payoffs.n > 0 && total != d.payoffs.n)
    r.issues.push_back(path + ".strategies counts sum to " + std::to_string(total) + ", expected n = " +
                       std::to_string(d.payoffs.n));
  return d;
}

StationarySpec read_stationary(Reader& r, const json& j, const std::string& path) {
  StationarySpec s;
  if (!r.object(j, path, {"classes", "window", "state_cap"})) return s;
  s.state_cap = r.count(j, "state_cap", path, s.state_cap);
  const json* list = r.array(j, "classes", path);
  if (!list || list->empty()) r.issues.push_back(path + ".classes needs at least one entry");
  if (list) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string at = path + ".classes[" + std::to_string(i) + "]";
      if (!r.object((*list)[i], at, {"id", "registered", "present", "lambda", "mu"})) continue;
      ClassSpec c;
      c.profile.id = r.text((*list)[i], "id", at, "class-" + std::to_string(i + 1));
      c.profile.c = 1.0;
      c.registered = r.count((*list)[i], "registered", at, 0);
      c.present = r.count((*list)[i], "present", at, c.registered);
      c.profile.lambda = r.number((*list)[i], "lambda", at, 0.0);
      c.profile.mu = r.number((*list)[i], "mu", at, 0.0);
      if (!(c.profile.lambda >= 0)) r.issues.push_back(at + ".lambda must be non-negative");
      if (!(c.profile.mu >= 0)) r.issues.push_back(at + ".mu must be non-negative");
      if (c.present > c.registered) r.issues.push_back(at + ".present exceeds registered");
      s.classes.push_back(c);
    }
  }
  if (const json* w = r.array(j, "window", path)) {
    if (w->size() != 2 || !(*w)[0].is_number_unsigned() || !(*w)[1].is_number_unsigned() ||
        (*w)[0].get<std::size_t>() > (*w)[1].get<std::size_t>())
      r.issues.push_back(path + ".window must be [low, high] state counts");
    else if (s.classes.size() != 1)
      r.issues.push_back(path + ".window needs exactly one class");
    else
      s.window = std::make_pair((*w)[0].get<std::size_t>(), (*w)[1].get<std::size_t>());
  }
  return s;
}

SweepSpec read_sweep(Reader& r, const json& j, const std::string& path) {
  SweepSpec s;
  if (!r.object(j, path, {"parameter", "values", "metrics"})) return s;
  s.parameter = r.text(j, "parameter", path, "");
  static const std::vector<std::string> known = {"env.r", "env.tau", "env.beta", "env.theta", "env.l",
                                                 "env.k_l", "players.*.c", "players.*.k", "players.*.t",
                                                 "players.*.z", "pools.*.t", "pools.*.z"};
  if (std::find(known.begin(), known.end(), s.parameter) == known.end())
    r.issues.push_back(path + ".parameter '" + s.parameter + "' does not resolve");
  const json* values = r.array(j, "values", path);
  if (!values || values->empty()) {
    r.issues.push_back(path + ".values needs at least one entry");
  } else {
    for (const auto& v : *values) {
      if (!v.is_number()) r.issues.push_back(path + ".values must hold numbers");
      else s.values.push_back(v.get<double>());
    }
  }
  if (const json* metrics = r.array(j, "metrics", path)) {
    for (const auto& m : *metrics) {
      const auto& names = sweep_metric_names();
      if (!m.is_string() || std::find(names.begin(), names.end(), m.get<std::string>()) == names.end())
        r.issues.push_back(path + ".metrics has an unknown metric " + m.dump());
      else s.metrics.push_back(m.get<std::string>());
    }
  } else {
    s.metrics = sweep_metric_names();
  }
  return s;
}

const char* kRequiredBlocks =
    "required: \"scenario\" plus its blocks (pool-solve: env and players or pools; protocol, shares, "
    "scenario-table: env and pools; dilemma-sim: dilemma; stationary: stationary; sweep: env, sweep "
    "and players or pools)";

}  // namespace

const char* to_string(RunKind kind) {
  switch (kind) {
    case RunKind::PoolSolve: return "pool-solve";
    case RunKind::Protocol: return "protocol";
    case RunKind::Shares: return "shares";
    case RunKind::ScenarioTable: return "scenario-table";
    case RunKind::DilemmaSim: return "dilemma-sim";
    case RunKind::Stationary: return "stationary";
    case RunKind::Sweep: return "sweep";
  }
  return "pool-solve";
}

const std::vector<std::string>& sweep_metric_names() {
  static const std::vector<std::string> names = {"network_power", "psi", "x_star", "utility",
                                                 "annual_energy_twh"};
  return names;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); }))
    throw ValidationError({origin + " is empty; " + kRequiredBlocks});
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError({origin + ": " + e.what()});
  }

  Reader r;
  RunConfig cfg;
  if (!r.object(root, "config", {"scenario", "seed", "env", "players", "pools", "fixed_point", "protocol",
                                 "shares", "dilemma", "stationary", "sweep"}))
    throw ValidationError(std::move(r.issues));

  const std::string kind = r.text(root, "scenario", "config", "");
  static const std::vector<std::pair<std::string, RunKind>> kinds = {
      {"pool-solve", RunKind::PoolSolve},         {"protocol", RunKind::Protocol},
      {"shares", RunKind::Shares},                {"scenario-table", RunKind::ScenarioTable},
      {"dilemma-sim", RunKind::DilemmaSim},       {"stationary", RunKind::Stationary},
      {"sweep", RunKind::Sweep}};
  auto found = std::find_if(kinds.begin(), kinds.end(), [&](const auto& k) { return k.first == kind; });
  if (kind.empty()) r.issues.push_back(std::string("config.scenario is missing; ") + kRequiredBlocks);
  else if (found == kinds.end()) r.issues.push_back("config.scenario '" + kind + "' is not a known scenario kind");
  else cfg.kind = found->second;

  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) r.issues.push_back("config.seed must be a non-negative integer");
    else cfg.seed = root.at("seed").get<std::uint64_t>();
  }

  if (root.contains("env") && r.object(root.at("env"), "env", {"r", "tau", "beta", "theta", "l", "k_l"})) {
    const json& e = root.at("env");
    cfg.env.r = r.number(e, "r", "env", cfg.env.r);
    cfg.env.tau = r.number(e, "tau", "env", cfg.env.tau);
    cfg.env.beta = r.number(e, "beta", "env", cfg.env.beta);
    cfg.env.theta = r.number(e, "theta", "env", cfg.env.theta);
    cfg.env.l = r.number(e, "l", "env", cfg.env.l);
    cfg.env.k_l = r.number(e, "k_l", "env", cfg.env.k_l);
    try {
      validate_env(cfg.env);
    } catch (const ValidationError& err) {
      for (const auto& issue : err.issues()) r.issues.push_back("env." + issue);
    }
  }
  if (const json* players = r.array(root, "players", "config")) cfg.players = read_players(r, *players, "players");
  if (const json* pools = r.array(root, "pools", "config")) cfg.pools = read_pools(r, *pools, "pools");

  if (root.contains("fixed_point") &&
      r.object(root.at("fixed_point"), "fixed_point", {"tolerance", "max_iterations", "damping"})) {
    const json& f = root.at("fixed_point");
    cfg.fixed_point.tolerance = r.number(f, "tolerance", "fixed_point", cfg.fixed_point.tolerance);
    cfg.fixed_point.max_iterations = r.count(f, "max_iterations", "fixed_point", cfg.fixed_point.max_iterations);
    cfg.fixed_point.damping = r.number(f, "damping", "fixed_point", cfg.fixed_point.damping);
    if (!(cfg.fixed_point.tolerance > 0)) r.issues.push_back("fixed_point.tolerance must be positive");
    if (!(cfg.fixed_point.damping >= 0 && cfg.fixed_point.damping < 1))
      r.issues.push_back("fixed_point.damping must lie in [0, 1)");
  }
  if (root.contains("protocol") && r.object(root.at("protocol"), "protocol", {"pool", "state_cap"})) {
    cfg.focus_pool = r.text(root.at("protocol"), "pool", "protocol", cfg.focus_pool);
    cfg.protocol.state_cap = r.count(root.at("protocol"), "state_cap", "protocol", cfg.protocol.state_cap);
  }
  if (root.contains("shares") && r.object(root.at("shares"), "shares", {"pool", "cost_basis", "reference"})) {
    const json& s = root.at("shares");
    cfg.focus_pool = r.text(s, "pool", "shares", cfg.focus_pool);
    const auto basis = r.text(s, "cost_basis", "shares", "assigned");
    if (basis == "assigned") cfg.basis = ShareCostBasis::AssignedWork;
    else if (basis == "protocol") cfg.basis = ShareCostBasis::ProtocolInvestment;
    else r.issues.push_back("shares.cost_basis must be 'assigned' or 'protocol'");
    if (s.contains("reference")) cfg.reference = r.text(s, "reference", "shares", "");
  }
  if (root.contains("dilemma")) cfg.dilemma = read_dilemma(r, root.at("dilemma"), "dilemma");
  if (root.contains("stationary")) cfg.stationary = read_stationary(r, root.at("stationary"), "stationary");
  if (root.contains("sweep")) cfg.sweep = read_sweep(r, root.at("sweep"), "sweep");

  // Blocks the chosen scenario needs.
  const bool has_env = root.contains("env");
  const bool has_game = !cfg.players.empty() || !cfg.pools.empty();
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) r.issues.push_back(std::string(to_string(cfg.kind)) + " needs " + what);
  };
  if (found != kinds.end()) {
    switch (cfg.kind) {
      case RunKind::PoolSolve:
        need(has_env, "an env block");
        need(has_game, "players or pools");
        break;
      case RunKind::Protocol:
      case RunKind::Shares:
      case RunKind::ScenarioTable:
        need(has_env, "an env block");
        need(!cfg.pools.empty(), "pools");
        break;
      case RunKind::DilemmaSim:
        need(cfg.dilemma.has_value(), "a dilemma block");
        break;
      case RunKind::Stationary:
        need(cfg.stationary.has_value(), "a stationary block");
        break;
      case RunKind::Sweep:
        need(has_env, "an env block");
        need(cfg.sweep.has_value(), "a sweep block");
        need(has_game, "players or pools");
        break;
    }
  }
  if (!cfg.focus_pool.empty() &&
      std::none_of(cfg.pools.begin(), cfg.pools.end(), [&](const PoolSpec& p) { return p.id == cfg.focus_pool; }))
    r.issues.push_back("pool '" + cfg.focus_pool + "' is not defined");

  if (!r.issues.empty()) throw ValidationError(std::move(r.issues));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open config " + path});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace coopmine
