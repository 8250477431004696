#include "coopmine/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "coopmine/model.hpp"
#include "coopmine/rng.hpp"

namespace coopmine {

namespace {

constexpr std::uint32_t kActionStream = 0;
constexpr std::uint32_t kShuffleStream = 1;
// Below this many agents a parallel region costs more than the step itself.
constexpr std::size_t kParallelAgents = 4096;

double quantile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

void validate_sim_config(const SimConfig& c) {
  std::vector<std::string> issues = dilemma_violations(c.payoffs);
  const std::size_t n = c.payoffs.n;
  if (n > std::numeric_limits<std::uint32_t>::max()) issues.push_back("n exceeds 2^32 agents");
  if (c.iterations < 1) issues.push_back("iterations must be at least 1");
  if (c.iterations > std::numeric_limits<std::uint32_t>::max()) issues.push_back("iterations exceed 2^32");
  if (!(c.initial_cooperation >= 0 && c.initial_cooperation <= 1))
    issues.push_back("initial_cooperation must lie in [0, 1]");
  if (!(c.error_rate >= 0 && c.error_rate <= 1)) issues.push_back("error_rate must lie in [0, 1]");
  if (c.runs < 1) issues.push_back("runs must be at least 1");
  if (c.record_profiles && n > 16) issues.push_back("profile recording needs n <= 16");
  std::size_t total = 0;
  for (std::size_t g = 0; g < c.groups.size(); ++g) {
    const auto& grp = c.groups[g];
    const std::string where = "groups[" + std::to_string(g) + "]";
    total += grp.count;
    if (!grp.strategy) {
      issues.push_back(where + ".strategy is missing");
      continue;
    }
    if (grp.strategy->p_cooperate.size() != n || grp.strategy->p_desert.size() != n)
      issues.push_back(where + ".strategy must hold n entries per action");
    for (std::size_t j = 0; j < grp.strategy->p_cooperate.size(); ++j)
      if (!(grp.strategy->p_cooperate[j] >= 0 && grp.strategy->p_cooperate[j] <= 1)) {
        issues.push_back(where + ".strategy has a probability outside [0, 1]");
        break;
      }
    for (std::size_t j = 0; j < grp.strategy->p_desert.size(); ++j)
      if (!(grp.strategy->p_desert[j] >= 0 && grp.strategy->p_desert[j] <= 1)) {
        issues.push_back(where + ".strategy has a probability outside [0, 1]");
        break;
      }
  }
  if (total != n) issues.push_back("strategy group counts sum to " + std::to_string(total) + ", expected n = " + std::to_string(n));
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run) {
  return splitmix64(splitmix64(master_seed) ^ static_cast<std::uint64_t>(run));
}

SimKernel::SimKernel(const SimConfig& config, std::uint64_t seed)
    : payoffs_(&config.payoffs), seed_(seed), error_rate_(config.error_rate) {
  agents_.reserve(config.payoffs.n);
  for (const auto& g : config.groups)
    for (std::size_t i = 0; i < g.count; ++i) agents_.push_back(g.strategy.get());
}

std::vector<std::uint8_t> SimKernel::initial_actions(std::size_t cooperators) const {
  const std::size_t n = agents_.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = 0; i < cooperators && i + 1 < n; ++i) {
    const double u = keyed_uniforms(seed_, static_cast<std::uint32_t>(i), 0u, kShuffleStream).first;
    const auto pick = i + std::min(static_cast<std::size_t>(u * static_cast<double>(n - i)), n - i - 1);
    std::swap(order[i], order[pick]);
  }
  std::vector<std::uint8_t> actions(n, 0);
  for (std::size_t i = 0; i < cooperators; ++i) actions[order[i]] = 1;
  return actions;
}

bool SimKernel::next_action(std::size_t agent, std::size_t t, bool own, std::size_t j) const {
  const auto u = keyed_uniforms(seed_, static_cast<std::uint32_t>(agent), static_cast<std::uint32_t>(t),
                                kActionStream);
  bool cooperate = u.first < agents_[agent]->p(own, j);
  if (error_rate_ > 0 && u.second < error_rate_) cooperate = !cooperate;
  return cooperate;
}

std::size_t step_parallel(const SimKernel& kernel, std::size_t t, std::span<const std::uint8_t> actions,
                          std::size_t cooperators, std::span<std::uint8_t> next,
                          std::span<double> utility) {
  const auto& pay = kernel.payoffs();
  const auto n = static_cast<std::ptrdiff_t>(kernel.n());
  std::size_t count = 0;
#pragma omp parallel for schedule(static) reduction(+ : count)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const bool own = actions[i] != 0;
    const std::size_t j = cooperators - (own ? 1 : 0);
    utility[i] += own ? pay.a[j] : pay.b[j];
    next[i] = kernel.next_action(i, t, own, j) ? 1 : 0;
    count += next[i];
  }
  return count;
}

SimTrajectory run(const SimConfig& config, std::size_t run_index, StepMode mode) {
  validate_sim_config(config);
  const std::size_t n = config.payoffs.n;
  SimTrajectory out;
  out.run = run_index;
  out.seed = run_seed(config.master_seed, run_index);
  const SimKernel kernel(config, out.seed);

  const auto initial = static_cast<std::size_t>(std::llround(config.initial_cooperation * static_cast<double>(n)));
  std::vector<std::uint8_t> actions = kernel.initial_actions(initial);
  std::vector<std::uint8_t> next(n);
  std::size_t cooperators = initial;
  out.cumulative_utility.assign(n, 0.0);
  out.cooperation.reserve(config.iterations);
  if (config.record_profiles) out.profile_counts.assign(std::size_t{1} << n, 0);

  const bool parallel = mode == StepMode::Parallel && n >= kParallelAgents;
  for (std::size_t t = 0; t < config.iterations; ++t) {
    out.cooperation.push_back(static_cast<double>(cooperators) / static_cast<double>(n));
    if (config.record_profiles) {
      std::size_t bits = 0;
      for (std::size_t i = 0; i < n; ++i) bits |= std::size_t{actions[i]} << i;
      ++out.profile_counts[bits];
    }
    cooperators = parallel ? step_parallel(kernel, t, actions, cooperators, next, out.cumulative_utility)
                           : step_serial(kernel, t, actions, cooperators, next, out.cumulative_utility);
    actions.swap(next);
  }
  return out;
}

TrajectorySummary summarize(std::span<const SimTrajectory> runs, std::size_t histogram_bins) {
  TrajectorySummary s;
  if (runs.empty()) return s;
  const std::size_t T = runs.front().cooperation.size();
  s.mean.resize(T);
  s.q10.resize(T);
  s.q50.resize(T);
  s.q90.resize(T);
  std::vector<double> column(runs.size());
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      column[r] = runs[r].cooperation.at(t);
      sum += column[r];
    }
    s.mean[t] = sum / static_cast<double>(runs.size());
    s.q10[t] = quantile(column, 0.1);
    s.q50[t] = quantile(column, 0.5);
    s.q90[t] = quantile(column, 0.9);
  }
  const std::size_t bins = std::max<std::size_t>(histogram_bins, 1);
  s.final_histogram.assign(bins, 0);
  for (const auto& r : runs) {
    if (r.cooperation.empty()) continue;
    const auto b = static_cast<std::size_t>(r.cooperation.back() * static_cast<double>(bins));
    ++s.final_histogram[std::min(b, bins - 1)];
  }
  return s;
}

BatchResult batch(const SimConfig& config, std::size_t histogram_bins) {
  validate_sim_config(config);
  BatchResult out;
  out.trajectories.resize(config.runs);
  if (config.runs == 1) {
    out.trajectories[0] = run(config, 0, StepMode::Parallel);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(config.runs); ++r)
      out.trajectories[static_cast<std::size_t>(r)] = run(config, static_cast<std::size_t>(r), StepMode::Serial);
  }
  out.summary = summarize(out.trajectories, histogram_bins);
  return out;
}

double fairness_deviation(const SimTrajectory& trajectory, std::size_t focal) {
  const auto& u = trajectory.cumulative_utility;
  if (u.size() < 2 || focal >= u.size()) throw ValidationError({"focal agent out of range"});
  if (trajectory.cooperation.empty()) throw ValidationError({"empty trajectory"});
  const double T = static_cast<double>(trajectory.cooperation.size());
  double others = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (i != focal) others += u[i];
  others /= static_cast<double>(u.size() - 1);
  return std::abs(u[focal] - others) / T;
}

}  // namespace coopmine
