#include <gtest/gtest.h>

#include <cmath>

#include "netzero/error.hpp"
#include "netzero/features.hpp"
#include "netzero/forecast.hpp"
#include "netzero/modelsel.hpp"
#include "synthetic.hpp"

using namespace netzero;

namespace {

struct Fixture {
  Store store;
  netzero::testing::SyntheticFacility synth = netzero::testing::make_synthetic({.months = 6, .seed = 3});
  Fixture() { netzero::testing::load_into(store, synth); }
  FacilityView view(AccessObserver* log = nullptr) const { return store.view("synth", log); }
};

TrainedModel constant_model(const FacilityView& v, Task task, double value) {
  auto ts = training_set(v, task, Date::from_ymd(2019, 1, 8), Date::from_ymd(2019, 2, 28));
  std::fill(ts.y.begin(), ts.y.end(), value);
  RegressorSpec spec = grid(Algorithm::boosted_trees).front();
  auto m = fit(spec, ts.x, ts.y);
  m.train_range = ts.range;
  return m;
}

ModelPair constant_pair(const FacilityView& v, YearMonth selected_for, double occupancy, double kwh) {
  return {constant_model(v, Task::occupancy, occupancy), constant_model(v, Task::demand, kwh), selected_for};
}

ModelPair real_pair(const FacilityView& v, YearMonth selected_for) {
  auto ts_o = training_set(v, Task::occupancy, Date::from_ymd(2019, 1, 8), (selected_for - 1).last_day());
  auto ts_d = training_set(v, Task::demand, Date::from_ymd(2019, 1, 8), (selected_for - 1).last_day());
  const auto spec = grid(Algorithm::hist_gbm)[12];
  return {fit(spec, ts_o.x, ts_o.y), fit(spec, ts_d.x, ts_d.y), selected_for};
}

}  // namespace

TEST(Forecast, ConstantModelsGiveFlatForecast) {
  Fixture f;
  const YearMonth m(2019, 4);
  const auto b = forecast_month(f.view(), constant_pair(f.view(), m, 120.4, 300.0), m, {.generated_at = "t0"});
  EXPECT_EQ(b.facility_id, "synth");
  EXPECT_EQ(b.month, m);
  EXPECT_EQ(b.generated_at, "t0");
  ASSERT_EQ(b.daily_kwh.size(), 30u);
  ASSERT_EQ(b.daily_occupancy.size(), 30u);
  for (const auto& [d, v] : b.daily_kwh) EXPECT_EQ(v, 300.0);
  for (const auto& [d, v] : b.daily_occupancy) EXPECT_EQ(v, 120.0);
  EXPECT_EQ(b.monthly_kwh, 9000.0);
  EXPECT_EQ(b.daily_kwh.begin()->first, m.first_day());
  EXPECT_EQ(b.daily_kwh.rbegin()->first, m.last_day());
}

TEST(Forecast, MonthlyTotalIsSumOfDaysAndOccupancyIsWhole) {
  Fixture f;
  const YearMonth m(2019, 5);
  const auto b = forecast_month(f.view(), real_pair(f.view(), m), m);
  double sum = 0.0;
  for (const auto& [d, v] : b.daily_kwh) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(b.monthly_kwh, sum, 1e-9);
  for (const auto& [d, v] : b.daily_occupancy) {
    EXPECT_EQ(v, std::round(v));
    EXPECT_GE(v, 0.0);
  }
  // Loose sanity: the fitted pipeline lands near the true month.
  EXPECT_NEAR(b.monthly_kwh, f.synth.true_monthly_kwh.at(m), 0.15 * f.synth.true_monthly_kwh.at(m));
}

TEST(Forecast, Deterministic) {
  Fixture f;
  const YearMonth m(2019, 5);
  const auto pair = real_pair(f.view(), m);
  EXPECT_EQ(forecast_month(f.view(), pair, m), forecast_month(f.view(), pair, m));
}

TEST(Forecast, DemandUsesForecastOccupancyNotSwipes) {
  Fixture f;
  const YearMonth m(2019, 5);
  AccessLog log;
  forecast_month(f.view(&log), real_pair(f.view(), m), m);
  EXPECT_EQ(log.count(DatasetKind::swipe, "demand"), 0u);
  EXPECT_GT(log.count(DatasetKind::calendar, "occupancy"), 0u);
}

TEST(Forecast, StaleModelsNeedPermission) {
  Fixture f;
  const auto pair = constant_pair(f.view(), YearMonth(2019, 3), 10, 100);
  try {
    forecast_month(f.view(), pair, YearMonth(2019, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
  EXPECT_NO_THROW(forecast_month(f.view(), pair, YearMonth(2019, 4), {.allow_stale = true}));
}

TEST(Forecast, MissingCalendarIsPrecondition) {
  Fixture f;
  const YearMonth beyond(2019, 7);
  try {
    forecast_month(f.view(), constant_pair(f.view(), beyond, 10, 100), beyond);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Forecast, WrongSchemaIsRejected) {
  Fixture f;
  auto pair = constant_pair(f.view(), YearMonth(2019, 4), 10, 100);
  std::swap(pair.occupancy, pair.demand);
  EXPECT_THROW(forecast_month(f.view(), pair, YearMonth(2019, 4)), Error);
}

TEST(Horizon, FirstMonthMatchesSingleForecast) {
  Fixture f;
  const YearMonth m(2019, 4);
  const auto pair = real_pair(f.view(), m);
  const auto h = forecast_horizon(f.view(), pair, m, 1);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0], forecast_month(f.view(), pair, m));
}

TEST(Horizon, ConsecutiveMonthsWithConstantModels) {
  Fixture f;
  const YearMonth m(2019, 4);
  const auto h = forecast_horizon(f.view(), constant_pair(f.view(), m, 50, 200), m, 3);
  ASSERT_EQ(h.size(), 3u);
  const double expected[] = {30 * 200.0, 31 * 200.0, 30 * 200.0};
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(h[i].month, m + i);
    EXPECT_EQ(h[i].monthly_kwh, expected[i]);
    EXPECT_EQ(h[i].models_selected_for, m);
  }
}

TEST(Horizon, LaterMonthsMatchStaleSingleForecasts) {
  Fixture f;
  const YearMonth m(2019, 4);
  const auto pair = real_pair(f.view(), m);
  const auto h = forecast_horizon(f.view(), pair, m, 3);
  for (int i = 1; i < 3; ++i) EXPECT_EQ(h[i], forecast_month(f.view(), pair, m + i, {.allow_stale = true}));
}

TEST(Horizon, LengthLimits) {
  Fixture f;
  const YearMonth m(2019, 4);
  const auto pair = constant_pair(f.view(), m, 50, 200);
  for (int n : {0, -1, 13}) {
    try {
      forecast_horizon(f.view(), pair, m, n);
      FAIL() << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
    }
  }
  EXPECT_THROW(forecast_horizon(f.view(), pair, m + 1, 1), Error);
}

TEST(Historic, PairsActualsWithForecast) {
  Fixture f;
  const YearMonth m(2019, 4);
  const auto b = forecast_month(f.view(), constant_pair(f.view(), m, 50, 200), m);
  const auto h = historic_comparison(f.view(), m, &b);
  ASSERT_EQ(h.days.size(), 30u);
  ASSERT_TRUE(h.actual_total.has_value());
  EXPECT_NEAR(*h.actual_total, f.synth.true_monthly_kwh.at(m), 1e-6);
  EXPECT_EQ(h.forecast_total, 6000.0);
  for (const auto& d : h.days) {
    EXPECT_EQ(d.actual_quality, "observed");
    EXPECT_EQ(d.forecast_kwh, 200.0);
  }
  const auto none = historic_comparison(f.view(), m, nullptr);
  EXPECT_FALSE(none.forecast_total.has_value());
  EXPECT_FALSE(none.days.front().forecast_kwh.has_value());
}

TEST(Historic, IncompleteAndImputedDays) {
  Fixture f;
  const YearMonth m(2019, 7);
  f.store.ingest("synth", DatasetKind::meter,
                 std::string_view("facility_id,timestamp,kwh\nsynth,2019-07-01T00:00:00,5\n"));
  MeterReading filled{HourStamp(Date::from_ymd(2019, 7, 1), 1), 3.0, Quality::imputed};
  std::vector<MeterReading> fill{filled};
  for (int h = 2; h < 24; ++h) fill.push_back({HourStamp(Date::from_ymd(2019, 7, 1), h), 1.0, Quality::imputed});
  f.store.write_imputed("synth", fill);
  const auto h = historic_comparison(f.view(), m, nullptr);
  EXPECT_EQ(h.days[0].actual_quality, "imputed");
  EXPECT_EQ(h.days[0].actual_kwh, 30.0);
  EXPECT_EQ(h.days[1].actual_quality, "incomplete");
  EXPECT_FALSE(h.actual_total.has_value());
}

TEST(Export, BundleCsv) {
  ForecastBundle b;
  b.daily_kwh[Date::from_ymd(2020, 2, 1)] = 10.5;
  b.daily_kwh[Date::from_ymd(2020, 2, 2)] = 7;
  b.daily_occupancy[Date::from_ymd(2020, 2, 1)] = 12;
  EXPECT_EQ(bundle_csv(b), "date,occupancy,kwh\n2020-02-01,12,10.5\n2020-02-02,,7\n");
}
