#include <gtest/gtest.h>

#include <random>

#include "netzero/error.hpp"
#include "netzero/json_io.hpp"

using namespace netzero;

namespace {

TrainedModel small_model(Algorithm a) {
  FeatureMatrix x(std::vector<std::string>{"a", "b"});
  std::vector<double> y;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) {
    x.add_row(std::vector<double>{static_cast<double>(rng() % 7), static_cast<double>(rng() % 5) / 3.0});
    y.push_back(static_cast<double>(rng() % 100) / 7.0);
  }
  RegressorSpec s = grid(a).front();
  s.n_estimators = 5;
  auto m = fit(s, x, y);
  m.train_range = DateRange{Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 12, 31)};
  return m;
}

void expect_schema_error(const std::function<void()>& f) {
  try {
    f();
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema) << e.what();
  }
}

}  // namespace

TEST(Json, TrainedModelRoundTripPredictsIdentically) {
  for (Algorithm a : {Algorithm::random_forest, Algorithm::boosted_trees, Algorithm::hist_gbm}) {
    const auto m = small_model(a);
    const auto text = to_json(m).dump();
    const auto back = trained_model_from_json(parse_json(text));
    EXPECT_EQ(back, m);
    std::vector<double> probe{3.5, 0.4};
    EXPECT_EQ(back.predict_row(probe), m.predict_row(probe));
  }
}

TEST(Json, TrainedModelRejectsUnknownVersion) {
  auto j = to_json(small_model(Algorithm::hist_gbm));
  j["format_version"] = 999;
  expect_schema_error([&] { trained_model_from_json(j); });
  j.erase("format_version");
  expect_schema_error([&] { trained_model_from_json(j); });
}

TEST(Json, RegressorSpecRoundTrip) {
  for (const auto& s : full_grid()) EXPECT_EQ(regressor_spec_from_json(to_json(s)), s);
}

TEST(Json, ForecastBundleRoundTrip) {
  ForecastBundle b;
  b.facility_id = "f1";
  b.month = YearMonth(2021, 2);
  for (Date d : DateRange::of(b.month).dates()) {
    b.daily_occupancy[d] = 100 + d.day();
    b.daily_kwh[d] = 1000.0 / 3.0 + d.day();
    b.monthly_kwh += b.daily_kwh[d];
  }
  b.occupancy_spec = grid(Algorithm::random_forest)[3];
  b.demand_spec = grid(Algorithm::hist_gbm)[7];
  b.models_selected_for = YearMonth(2021, 1);
  b.generated_at = "2021-02-01T00:00:00Z";
  EXPECT_EQ(forecast_bundle_from_json(parse_json(to_json(b).dump())), b);
}

TEST(Json, OffsetInstanceAndPlanRoundTrip) {
  OffsetInstance inst;
  inst.mode = OffsetMode::max_offset;
  inst.budget = 123456;
  inst.granularity = 10;
  inst.projects = {{"wind", 1200, 0.25, true}, {"solar", 900, 0.0, false}};
  inst.annotations = {"note"};
  const auto back = offset_instance_from_json(to_json(inst));
  EXPECT_EQ(back.projects.size(), 2u);
  EXPECT_EQ(back.projects[0].name, "wind");
  EXPECT_EQ(back.projects[0].unit_cost, 1200);
  EXPECT_EQ(back.projects[0].min_share, 0.25);
  EXPECT_FALSE(back.projects[1].enabled);
  EXPECT_EQ(back.budget, inst.budget);
  EXPECT_EQ(back.granularity, 10);
  EXPECT_EQ(back.annotations, inst.annotations);
  EXPECT_EQ(to_json(back), to_json(inst));

  const auto plan = solve(inst);
  EXPECT_EQ(to_json(offset_plan_from_json(to_json(plan))), to_json(plan));
}

TEST(Json, OffsetInstanceSchemaErrors) {
  expect_schema_error([] { offset_instance_from_json(json::object()); });
  expect_schema_error([] { offset_instance_from_json(parse_json(R"({"mode":"max_offset","projects":[{"name":1}]})")); });
  expect_schema_error([] { offset_instance_from_json(parse_json(R"({"mode":"max_offset","projects":"x"})")); });
}

TEST(Json, FacilityConfigRoundTrip) {
  FacilityConfig c;
  c.id = "plant-7";
  c.name = "Plant 7";
  c.retention_months = 36;
  c.imputation_mse_threshold = 0.002;
  c.emission_factor = 0.71;
  EXPECT_EQ(facility_config_from_json(to_json(c)), c);
  expect_schema_error([] { facility_config_from_json(parse_json(R"({"name":"x"})")); });
}

TEST(Json, KpiAndRates) {
  KpiRow k{"A", "2021", 85.79, 3349, 0.092};
  const auto back = kpi_row_from_json(to_json(k));
  EXPECT_EQ(back.facility_id, "A");
  EXPECT_EQ(back.gp_utilization_pct, 85.79);
  EXPECT_EQ(back.co2_reduction_mtco2e, 3349);
  EXPECT_EQ(rates_from_json(to_json(Rates{500, 800})), (Rates{500, 800}));
  expect_schema_error([] { rates_from_json(parse_json(R"({"green_rate":"cheap"})")); });
}

TEST(Json, SelectionReportRoundTrip) {
  ModelSelectionReport r;
  r.facility_id = "f1";
  r.task = Task::occupancy;
  r.target_month = YearMonth(2021, 8);
  r.windows = make_windows(r.target_month);
  for (int i = 0; i < 3; ++i) {
    SpecEvaluation e;
    e.spec = grid(Algorithm::boosted_trees)[i];
    e.average = {0.1 * i + 0.01, i == 1 ? std::nullopt : std::optional<double>(0.3), 60, 7};
    e.per_window = {e.average, e.average};
    r.evaluated.push_back(e);
  }
  r.winner = 0;
  EXPECT_EQ(selection_report_from_json(parse_json(to_json(r).dump())), r);
}

TEST(Json, ParseErrorsAreSchemaErrors) {
  expect_schema_error([] { parse_json("{not json"); });
  expect_schema_error([] { parse_json(""); });
  EXPECT_EQ(parse_json(R"({"a":1})")["a"], 1);
}
