#include "netzero/forecast.hpp"

#include <cmath>

#include "netzero/error.hpp"
#include "netzero/features.hpp"
#include "netzero/text.hpp"

namespace netzero {

namespace {

void check_schema(const TrainedModel& m, const std::vector<std::string>& schema, const char* what) {
  if (m.feature_schema != schema) {
    fail(ErrorKind::invalid_argument, std::string(what) + " model was fitted on a different feature schema");
  }
}

ForecastBundle run_month(const FacilityView& view, const ModelPair& models, YearMonth month,
                         const ForecastOptions& options) {
  const DateRange range = DateRange::of(month);

  view.stage("occupancy");
  auto occ_rows = build_occupancy_rows(view, range);
  auto occ_pred = predict(models.occupancy, to_matrix(std::span<const OccupancyFeatureRow>(occ_rows)));

  ForecastBundle b;
  b.facility_id = view.config().id;
  b.month = month;
  b.occupancy_spec = models.occupancy.spec;
  b.demand_spec = models.demand.spec;
  b.models_selected_for = models.selected_for;
  b.generated_at = options.generated_at;
  for (std::size_t i = 0; i < occ_rows.size(); ++i) {
    b.daily_occupancy[occ_rows[i].date] = std::max(0.0, std::round(occ_pred[i]));
  }

  view.stage("demand");
  auto demand_rows = build_demand_rows(view, range, OccupancySource::forecast, &b.daily_occupancy);
  auto kwh = predict(models.demand, to_matrix(std::span<const DemandFeatureRow>(demand_rows)));
  view.stage("");

  b.monthly_kwh = 0.0;
  for (std::size_t i = 0; i < demand_rows.size(); ++i) {
    const double v = std::max(0.0, kwh[i]);
    b.daily_kwh[demand_rows[i].date] = v;
  }
  for (const auto& [d, v] : b.daily_kwh) b.monthly_kwh += v;
  return b;
}

}  // namespace

ForecastBundle forecast_month(const FacilityView& view, const ModelPair& models, YearMonth target,
                              const ForecastOptions& options) {
  check_schema(models.occupancy, occupancy_schema(), "occupancy");
  check_schema(models.demand, demand_schema(), "demand");
  if (models.selected_for != target && !options.allow_stale) {
    fail(ErrorKind::precondition, "models were selected for " + models.selected_for.to_string() + ", not " +
                                      target.to_string() + " (retrain or allow stale models)");
  }
  return run_month(view, models, target, options);
}

std::vector<ForecastBundle> forecast_horizon(const FacilityView& view, const ModelPair& models, YearMonth start,
                                             int n_months, const ForecastOptions& options) {
  if (n_months < 1 || n_months > kMaxHorizonMonths) {
    fail(ErrorKind::invalid_argument, "horizon must be between 1 and " + std::to_string(kMaxHorizonMonths) +
                                          " months, got " + std::to_string(n_months));
  }
  std::vector<ForecastBundle> out;
  out.push_back(forecast_month(view, models, start, options));
  ForecastOptions later = options;
  later.allow_stale = true;
  for (int k = 1; k < n_months; ++k) out.push_back(run_month(view, models, start + k, later));
  return out;
}

HistoricComparison historic_comparison(const FacilityView& view, YearMonth month, const ForecastBundle* bundle) {
  HistoricComparison out;
  out.facility_id = view.config().id;
  out.month = month;
  bool complete = true;
  double total = 0.0;
  for (Date d : DateRange::of(month).dates()) {
    DayComparison day;
    day.date = d;
    day.actual_kwh = view.daily_kwh(d);
    if (day.actual_kwh) {
      day.actual_quality = view.day_has_imputed(d) ? "imputed" : "observed";
      total += *day.actual_kwh;
    } else {
      day.actual_quality = "incomplete";
      complete = false;
    }
    if (bundle) {
      auto it = bundle->daily_kwh.find(d);
      if (it != bundle->daily_kwh.end()) day.forecast_kwh = it->second;
    }
    out.days.push_back(day);
  }
  if (complete) out.actual_total = total;
  if (bundle) out.forecast_total = bundle->monthly_kwh;
  return out;
}

std::string bundle_csv(const ForecastBundle& bundle) {
  std::string s = "date,occupancy,kwh\n";
  for (const auto& [d, kwh] : bundle.daily_kwh) {
    auto occ = bundle.daily_occupancy.find(d);
    s += d.to_string() + "," + (occ == bundle.daily_occupancy.end() ? std::string() : text::format_double(occ->second)) +
         "," + text::format_double(kwh) + "\n";
  }
  return s;
}

}  // namespace netzero
