#include <benchmark/benchmark.h>

#include <random>

#include "netzero/offset.hpp"

namespace {

netzero::OffsetInstance instance(std::size_t projects, netzero::Minor budget, bool floors) {
  netzero::OffsetInstance inst;
  inst.budget = budget;
  std::mt19937_64 rng(projects * 31 + static_cast<std::uint64_t>(budget));
  const char* names[] = {"wind", "solar", "biomass", "energy_efficiency", "agroforestry"};
  for (std::size_t i = 0; i < projects; ++i) {
    inst.projects.push_back({names[i % 5], 500 + static_cast<netzero::Minor>(rng() % 4500),
                             floors ? 0.05 * static_cast<double>(i % 3) : 0.0, true});
  }
  return inst;
}

void BM_MaxOffset(benchmark::State& state) {
  const auto inst = instance(static_cast<std::size_t>(state.range(0)), state.range(1), true);
  std::uint64_t nodes = 0;
  for (auto _ : state) {
    const auto plan = netzero::solve(inst);
    nodes = plan.nodes_explored;
    benchmark::DoNotOptimize(plan);
  }
  state.counters["nodes"] = static_cast<double>(nodes);
}

void BM_MinCost(benchmark::State& state) {
  auto inst = instance(static_cast<std::size_t>(state.range(0)), 1, false);
  inst.mode = netzero::OffsetMode::min_cost;
  inst.budget.reset();
  inst.target_offset = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(netzero::solve(inst));
}

}  // namespace

BENCHMARK(BM_MaxOffset)->Args({3, 100'000})->Args({5, 100'000})->Args({5, 1'000'000});
BENCHMARK(BM_MinCost)->Args({3, 50})->Args({5, 200});

BENCHMARK_MAIN();
