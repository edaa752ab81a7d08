#pragma once

// Serial forecasting pipeline: the occupancy model runs first and its
// rounded output feeds the demand model.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netzero/calendar.hpp"
#include "netzero/datastore.hpp"
#include "netzero/regress.hpp"

namespace netzero {

/// The occupancy and demand models used together for one forecast.
struct ModelPair {
  TrainedModel occupancy;
  TrainedModel demand;
  YearMonth selected_for;  // month the models were selected for
};

struct ForecastBundle {
  FacilityId facility_id;
  YearMonth month;
  std::map<Date, double> daily_occupancy;
  std::map<Date, double> daily_kwh;
  double monthly_kwh = 0.0;
  RegressorSpec occupancy_spec;
  RegressorSpec demand_spec;
  YearMonth models_selected_for;
  std::string generated_at;  // ISO-8601, supplied by the caller

  bool operator==(const ForecastBundle&) const = default;
};

struct ForecastOptions {
  /// Accept models selected for a month other than the target.
  bool allow_stale = false;
  std::string generated_at;
};

inline constexpr int kMaxHorizonMonths = 12;

/// Errors: precondition for missing calendar rows, stale models (unless
/// allowed), or no weather basis.
ForecastBundle forecast_month(const FacilityView& view, const ModelPair& models, YearMonth target,
                              const ForecastOptions& options = {});

/// One bundle per month starting at `start`. Staleness is checked against
/// `start` only; later months reuse the same models and the same frozen
/// consumption trend. Throws Error(invalid_argument) unless
/// 1 <= n_months <= 12.
std::vector<ForecastBundle> forecast_horizon(const FacilityView& view, const ModelPair& models, YearMonth start,
                                             int n_months, const ForecastOptions& options = {});

struct DayComparison {
  Date date;
  std::optional<double> actual_kwh;
  std::optional<double> forecast_kwh;
  /// "observed", "imputed" (any hour filled) or "incomplete".
  std::string actual_quality;
};

struct HistoricComparison {
  FacilityId facility_id;
  YearMonth month;
  std::vector<DayComparison> days;
  std::optional<double> actual_total;    // only when every day is complete
  std::optional<double> forecast_total;  // only when a bundle exists
};

/// Pairs actual daily consumption with a stored forecast (may be null).
HistoricComparison historic_comparison(const FacilityView& view, YearMonth month, const ForecastBundle* bundle);

/// CSV export: date,occupancy,kwh
std::string bundle_csv(const ForecastBundle& bundle);

}  // namespace netzero
