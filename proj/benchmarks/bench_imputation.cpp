#include <benchmark/benchmark.h>

#include <random>

#include "netzero/imputation.hpp"

namespace {

void BM_Descend(benchmark::State& state) {
  const auto gaps = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(5.0, 80.0);
  std::vector<double> seeds(gaps);
  for (double& s : seeds) s = u(rng);
  const double observed = 20000.0;
  const double invoice = observed + 30.0 * static_cast<double>(gaps);
  for (auto _ : state) benchmark::DoNotOptimize(netzero::descend_to_invoice(observed, invoice, seeds, 0.01, 1000, 1e-24));
}

void BM_ImputeMonth(benchmark::State& state) {
  netzero::Store store;
  netzero::FacilityConfig config;
  config.id = "bench";
  store.upsert_facility(config);
  std::mt19937_64 rng(5);
  std::string csv = "facility_id,timestamp,kwh\n";
  double total = 0.0;
  for (netzero::YearMonth m(2021, 1); m <= netzero::YearMonth(2021, 12); m = m + 1) {
    for (const auto& h : netzero::hourly_grid(m)) {
      const double kwh = 20.0 + static_cast<double>(h.hour() % 12);
      if (m == netzero::YearMonth(2021, 12)) total += kwh;
      if (m == netzero::YearMonth(2021, 12) && static_cast<long>(rng() % 100) < state.range(0)) continue;
      csv += "bench," + h.to_string() + "," + std::to_string(static_cast<int>(kwh)) + "\n";
    }
  }
  store.ingest("bench", netzero::DatasetKind::meter, csv);
  store.ingest("bench", netzero::DatasetKind::invoice,
               "facility_id,month,total_kwh,green_kwh_billed,green_rate,conventional_rate\nbench,2021-12," +
                   std::to_string(static_cast<long>(total)) + ",0,5.00,8.00\n");
  const auto view = store.view("bench");
  for (auto _ : state) benchmark::DoNotOptimize(netzero::impute_month(view, netzero::YearMonth(2021, 12)));
}

}  // namespace

BENCHMARK(BM_Descend)->Arg(10)->Arg(300);
BENCHMARK(BM_ImputeMonth)->Arg(5)->Arg(40);

BENCHMARK_MAIN();
