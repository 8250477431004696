#include <benchmark/benchmark.h>

#include <memory>

#include "coopmine/simulate.hpp"

using namespace coopmine;

namespace {

SimConfig config(std::size_t n, std::size_t iterations, std::size_t runs) {
  SimConfig c;
  c.payoffs = build_payoffs(35, 0.04, 70, 0.05, n);
  c.iterations = iterations;
  c.initial_cooperation = 0.98;
  c.groups = {{std::make_shared<const MemoryOneStrategy>(fair_strategy(c.payoffs, phi_from_max_gap(c.payoffs))), n}};
  c.master_seed = 2024;
  c.runs = runs;
  return c;
}

template <auto Step>
void step(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = config(n, 1, 1);
  const SimKernel kernel(c, 1);
  const std::size_t coop = n * 98 / 100;
  const auto actions = kernel.initial_actions(coop);
  std::vector<std::uint8_t> next(n);
  std::vector<double> utility(n, 0.0);
  std::size_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(Step(kernel, t++, actions, coop, next, utility));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void batch_serial_runs(benchmark::State& state) {
  const auto c = config(10000, 50, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_serial(c));
}

void batch_parallel_runs(benchmark::State& state) {
  const auto c = config(10000, 50, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch(c));
}

}  // namespace

BENCHMARK(step<step_serial>)->Arg(10000)->Arg(100000);
BENCHMARK(step<step_parallel>)->Arg(10000)->Arg(100000);
BENCHMARK(batch_serial_runs)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(batch_parallel_runs)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
