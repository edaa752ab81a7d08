#include <benchmark/benchmark.h>

#include <random>

#include "netzero/regress.hpp"

namespace {

struct Training {
  netzero::FeatureMatrix x;
  std::vector<double> y;
};

// Roughly the shape of a facility's daily demand table: a few hundred rows,
// a dozen mostly-continuous columns.
Training make_training(std::size_t rows, std::size_t cols) {
  std::vector<std::string> schema;
  for (std::size_t c = 0; c < cols; ++c) schema.push_back("c" + std::to_string(c));
  Training t{netzero::FeatureMatrix(schema), {}};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> row(cols);
    double target = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = c < 3 ? static_cast<double>(rng() % 7) : n(rng) * 10.0;
      target += static_cast<double>(c + 1) * row[c];
    }
    t.x.add_row(row);
    t.y.push_back(target + n(rng));
  }
  return t;
}

void BM_Fit(benchmark::State& state, netzero::Algorithm algorithm, std::size_t spec_index) {
  const auto t = make_training(static_cast<std::size_t>(state.range(0)), 12);
  const auto spec = netzero::grid(algorithm).at(spec_index);
  for (auto _ : state) benchmark::DoNotOptimize(netzero::fit(spec, t.x, t.y));
  state.SetLabel(spec.describe());
}

void BM_Predict(benchmark::State& state) {
  const auto t = make_training(700, 12);
  const auto model = netzero::fit(netzero::grid(netzero::Algorithm::boosted_trees).back(), t.x, t.y);
  for (auto _ : state) benchmark::DoNotOptimize(netzero::predict(model, t.x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.y.size()));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Fit, forest_50, netzero::Algorithm::random_forest, 9)->Arg(200)->Arg(700);
BENCHMARK_CAPTURE(BM_Fit, boosted_100, netzero::Algorithm::boosted_trees, 27)->Arg(200)->Arg(700);
BENCHMARK_CAPTURE(BM_Fit, hist_50, netzero::Algorithm::hist_gbm, 24)->Arg(200)->Arg(700);
BENCHMARK(BM_Predict);

BENCHMARK_MAIN();
