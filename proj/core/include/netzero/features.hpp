#pragma once

// Daily feature rows for the occupancy and demand models.
//
// Model-facing vectors are positional: the column order is fixed by
// occupancy_schema() / demand_schema() and never depends on how the data
// was stored or ingested.

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "netzero/calendar.hpp"
#include "netzero/datastore.hpp"
#include "netzero/regress.hpp"

namespace netzero {

struct OccupancyFeatureRow {
  Date date;
  int day_of_week = 0;  // 0 = Monday
  int month_of_year = 1;
  bool is_holiday = false;
  std::int64_t event_count = 0;
  double visitor_count = 0.0;
  bool lockdown_flag = false;
  std::optional<double> target_occupancy;  // swipes + visitors, historical dates only

  bool operator==(const OccupancyFeatureRow&) const = default;
};

struct DemandFeatureRow {
  Date date;
  double occupancy = 0.0;
  int day_of_week = 0;
  bool is_holiday = false;
  bool lockdown_flag = false;
  double avg_temp = 0.0;
  double avg_precip = 0.0;
  double avg_humidity = 0.0;
  double avg_pressure = 0.0;
  double recent_trend = 0.0;  // mean daily kWh over the previous seven days
  std::optional<double> target_kwh;

  bool operator==(const DemandFeatureRow&) const = default;
};

enum class OccupancySource { actual, forecast };

const std::vector<std::string>& occupancy_schema();
const std::vector<std::string>& demand_schema();

std::vector<double> feature_vector(const OccupancyFeatureRow& row);
std::vector<double> feature_vector(const DemandFeatureRow& row);

FeatureMatrix to_matrix(std::span<const OccupancyFeatureRow> rows);
FeatureMatrix to_matrix(std::span<const DemandFeatureRow> rows);
/// Throws if any row lacks a target.
std::vector<double> targets(std::span<const OccupancyFeatureRow> rows);
std::vector<double> targets(std::span<const DemandFeatureRow> rows);

/// One row per date. Dates with a swipe record are historical and carry a
/// target; other dates get the weekday-mean visitor count from earlier
/// history. Errors list every date without a calendar record.
std::vector<OccupancyFeatureRow> build_occupancy_rows(const FacilityView& view, DateRange range);

/// Mean daily kWh over [d-7, d-1]; empty unless all seven days are complete.
std::optional<double> trailing_week_mean(const FacilityView& view, Date d);

/// Mean of the latest complete seven-day window ending before `before`.
std::optional<double> frozen_trend(const FacilityView& view, Date before);

/// Actual weather when recorded (history or an ingested forecast file),
/// otherwise the per-(month, day-of-month) mean of earlier years, then the
/// month mean, then the overall mean.
WeatherRecord inference_weather(const FacilityView& view, Date d);

/// actual: occupancy from swipes, weather and the seven-day trend from
/// history; every day must be complete (training rows, carry targets).
/// forecast: occupancy from `forecast_occupancy`; weather per
/// inference_weather; recent_trend frozen at the last complete week before
/// the range. Swipe data is never read in this mode.
std::vector<DemandFeatureRow> build_demand_rows(const FacilityView& view, DateRange range, OccupancySource source,
                                                const std::map<Date, double>* forecast_occupancy = nullptr);

/// Training rows over [first, last], skipping dates whose inputs are
/// incomplete instead of failing.
std::vector<OccupancyFeatureRow> occupancy_training_rows(const FacilityView& view, Date first, Date last);
std::vector<DemandFeatureRow> demand_training_rows(const FacilityView& view, Date first, Date last);

/// CSV export; column order is the model schema framed by date and target.
void write_csv(std::ostream& out, std::span<const OccupancyFeatureRow> rows);
void write_csv(std::ostream& out, std::span<const DemandFeatureRow> rows);

}  // namespace netzero
