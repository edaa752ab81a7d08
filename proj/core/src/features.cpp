#include "netzero/features.hpp"

#include <array>
#include <ostream>

#include "netzero/error.hpp"
#include "netzero/text.hpp"

namespace netzero {

const std::vector<std::string>& occupancy_schema() {
  static const std::vector<std::string> s{"day_of_week", "month_of_year", "is_holiday",
                                          "event_count", "visitor_count", "lockdown_flag"};
  return s;
}

const std::vector<std::string>& demand_schema() {
  static const std::vector<std::string> s{"occupancy",    "day_of_week", "is_holiday",
                                          "lockdown_flag", "avg_temp",    "avg_precip",
                                          "avg_humidity", "avg_pressure", "recent_trend"};
  return s;
}

std::vector<double> feature_vector(const OccupancyFeatureRow& r) {
  return {static_cast<double>(r.day_of_week), static_cast<double>(r.month_of_year),
          r.is_holiday ? 1.0 : 0.0,          static_cast<double>(r.event_count),
          r.visitor_count,                   r.lockdown_flag ? 1.0 : 0.0};
}

std::vector<double> feature_vector(const DemandFeatureRow& r) {
  return {r.occupancy,  static_cast<double>(r.day_of_week),
          r.is_holiday ? 1.0 : 0.0, r.lockdown_flag ? 1.0 : 0.0,
          r.avg_temp,   r.avg_precip,
          r.avg_humidity, r.avg_pressure,
          r.recent_trend};
}

namespace {

template <typename Row>
FeatureMatrix matrix_of(std::span<const Row> rows, const std::vector<std::string>& schema) {
  FeatureMatrix m(schema);
  for (const auto& r : rows) m.add_row(feature_vector(r));
  return m;
}

std::string date_list(const std::vector<Date>& dates) {
  std::string s;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (i == 8) {
      s += ", ... (" + std::to_string(dates.size()) + " total)";
      break;
    }
    if (i) s += ", ";
    s += dates[i].to_string();
  }
  return s;
}

OccupancyFeatureRow calendar_part(const CalendarRecord& cal, Date d) {
  OccupancyFeatureRow row;
  row.date = d;
  row.day_of_week = d.weekday();
  row.month_of_year = static_cast<int>(d.month());
  row.is_holiday = cal.is_holiday;
  row.event_count = cal.event_count;
  row.lockdown_flag = cal.lockdown_flag;
  return row;
}

}  // namespace

FeatureMatrix to_matrix(std::span<const OccupancyFeatureRow> rows) { return matrix_of(rows, occupancy_schema()); }
FeatureMatrix to_matrix(std::span<const DemandFeatureRow> rows) { return matrix_of(rows, demand_schema()); }

std::vector<double> targets(std::span<const OccupancyFeatureRow> rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!r.target_occupancy) fail(ErrorKind::invalid_argument, "row " + r.date.to_string() + " has no target");
    out.push_back(*r.target_occupancy);
  }
  return out;
}

std::vector<double> targets(std::span<const DemandFeatureRow> rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!r.target_kwh) fail(ErrorKind::invalid_argument, "row " + r.date.to_string() + " has no target");
    out.push_back(*r.target_kwh);
  }
  return out;
}

std::vector<OccupancyFeatureRow> build_occupancy_rows(const FacilityView& view, DateRange range) {
  std::vector<OccupancyFeatureRow> rows;
  std::vector<Date> missing;
  std::vector<std::size_t> need_visitors;
  for (Date d : range.dates()) {
    const CalendarRecord* cal = view.calendar(d);
    if (!cal) {
      missing.push_back(d);
      continue;
    }
    OccupancyFeatureRow row = calendar_part(*cal, d);
    if (const SwipeRecord* sw = view.swipe(d)) {
      row.visitor_count = static_cast<double>(sw->visitor_count);
      row.target_occupancy = static_cast<double>(sw->employee_swipes + sw->visitor_count);
    } else {
      need_visitors.push_back(rows.size());
    }
    rows.push_back(row);
  }
  if (!missing.empty()) {
    fail(ErrorKind::precondition, "calendar has no record for " + date_list(missing));
  }
  if (!need_visitors.empty()) {
    std::array<double, 7> sum{};
    std::array<int, 7> n{};
    double all = 0.0;
    int all_n = 0;
    if (auto start = view.data_start(); start && *start < range.first) {
      for (const auto& s : view.swipes_between(*start, range.first - 1)) {
        const auto w = static_cast<std::size_t>(s.date.weekday());
        sum[w] += static_cast<double>(s.visitor_count);
        ++n[w];
        all += static_cast<double>(s.visitor_count);
        ++all_n;
      }
    }
    for (std::size_t i : need_visitors) {
      const auto w = static_cast<std::size_t>(rows[i].day_of_week);
      rows[i].visitor_count = n[w] ? sum[w] / n[w] : (all_n ? all / all_n : 0.0);
    }
  }
  return rows;
}

std::optional<double> trailing_week_mean(const FacilityView& view, Date d) {
  double sum = 0.0;
  for (int k = 7; k >= 1; --k) {
    auto v = view.daily_kwh(d - k);
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum / 7.0;
}

std::optional<double> frozen_trend(const FacilityView& view, Date before) {
  auto start = view.data_start();
  if (!start) return std::nullopt;
  // Walk back to the most recent run of seven complete days.
  int run = 0;
  double window[7];
  for (Date d = before - 1; d >= *start; d = d - 1) {
    auto v = view.daily_kwh(d);
    if (!v) {
      run = 0;
      continue;
    }
    window[run++] = *v;
    if (run == 7) {
      double sum = 0.0;
      for (int k = 6; k >= 0; --k) sum += window[k];  // oldest first
      return sum / 7.0;
    }
  }
  return std::nullopt;
}

WeatherRecord inference_weather(const FacilityView& view, Date d) {
  if (const WeatherRecord* w = view.weather(d)) return *w;
  auto start = view.data_start();
  std::vector<WeatherRecord> history;
  if (start && *start < d) history = view.weather_between(*start, d - 1);
  if (history.empty()) {
    fail(ErrorKind::precondition, "no weather record or history for " + d.to_string());
  }
  struct Acc {
    double t = 0, p = 0, h = 0, pr = 0;
    int n = 0;
    void add(const WeatherRecord& w) {
      t += w.avg_temp;
      p += w.avg_precip;
      h += w.avg_humidity;
      pr += w.avg_pressure;
      ++n;
    }
  } same_day, same_month, all;
  for (const auto& w : history) {
    all.add(w);
    if (w.date.month() == d.month()) {
      same_month.add(w);
      if (w.date.day() == d.day()) same_day.add(w);
    }
  }
  const Acc& a = same_day.n ? same_day : (same_month.n ? same_month : all);
  WeatherRecord out;
  out.date = d;
  out.avg_temp = a.t / a.n;
  out.avg_precip = a.p / a.n;
  out.avg_humidity = a.h / a.n;
  out.avg_pressure = a.pr / a.n;
  return out;
}

namespace {

void set_weather(DemandFeatureRow& row, const WeatherRecord& w) {
  row.avg_temp = w.avg_temp;
  row.avg_precip = w.avg_precip;
  row.avg_humidity = w.avg_humidity;
  row.avg_pressure = w.avg_pressure;
}

// Fills one training row; returns the reason when an input is missing.
std::string fill_actual(const FacilityView& view, Date d, DemandFeatureRow& row) {
  const CalendarRecord* cal = view.calendar(d);
  if (!cal) return "no calendar record";
  const SwipeRecord* sw = view.swipe(d);
  if (!sw) return "no swipe record";
  const WeatherRecord* w = view.weather(d);
  if (!w) return "no weather record";
  auto trend = trailing_week_mean(view, d);
  if (!trend) return "insufficient lookback for recent_trend";
  auto kwh = view.daily_kwh(d);
  if (!kwh) return "incomplete meter data";
  row.date = d;
  row.occupancy = static_cast<double>(sw->employee_swipes + sw->visitor_count);
  row.day_of_week = d.weekday();
  row.is_holiday = cal->is_holiday;
  row.lockdown_flag = cal->lockdown_flag;
  set_weather(row, *w);
  row.recent_trend = *trend;
  row.target_kwh = *kwh;
  return {};
}

}  // namespace

std::vector<DemandFeatureRow> build_demand_rows(const FacilityView& view, DateRange range, OccupancySource source,
                                                const std::map<Date, double>* forecast_occupancy) {
  std::vector<DemandFeatureRow> rows;
  if (source == OccupancySource::actual) {
    for (Date d : range.dates()) {
      DemandFeatureRow row;
      if (auto reason = fill_actual(view, d, row); !reason.empty()) {
        fail(ErrorKind::precondition, d.to_string() + ": " + reason);
      }
      rows.push_back(row);
    }
    return rows;
  }

  if (!forecast_occupancy) fail(ErrorKind::invalid_argument, "forecast occupancy required");
  auto trend = frozen_trend(view, range.first);
  if (!trend) {
    fail(ErrorKind::precondition, "insufficient lookback: no complete week of meter data before " +
                                      range.first.to_string());
  }
  std::vector<Date> missing_calendar;
  for (Date d : range.dates()) {
    auto occ = forecast_occupancy->find(d);
    if (occ == forecast_occupancy->end()) {
      fail(ErrorKind::precondition, "no forecast occupancy for " + d.to_string());
    }
    const CalendarRecord* cal = view.calendar(d);
    if (!cal) {
      missing_calendar.push_back(d);
      continue;
    }
    DemandFeatureRow row;
    row.date = d;
    row.occupancy = occ->second;
    row.day_of_week = d.weekday();
    row.is_holiday = cal->is_holiday;
    row.lockdown_flag = cal->lockdown_flag;
    set_weather(row, inference_weather(view, d));
    row.recent_trend = *trend;
    rows.push_back(row);
  }
  if (!missing_calendar.empty()) {
    fail(ErrorKind::precondition, "calendar has no record for " + date_list(missing_calendar));
  }
  return rows;
}

std::vector<OccupancyFeatureRow> occupancy_training_rows(const FacilityView& view, Date first, Date last) {
  std::vector<OccupancyFeatureRow> rows;
  for (Date d = first; d <= last; ++d) {
    const CalendarRecord* cal = view.calendar(d);
    const SwipeRecord* sw = view.swipe(d);
    if (!cal || !sw) continue;
    OccupancyFeatureRow row = calendar_part(*cal, d);
    row.visitor_count = static_cast<double>(sw->visitor_count);
    row.target_occupancy = static_cast<double>(sw->employee_swipes + sw->visitor_count);
    rows.push_back(row);
  }
  return rows;
}

std::vector<DemandFeatureRow> demand_training_rows(const FacilityView& view, Date first, Date last) {
  std::vector<DemandFeatureRow> rows;
  for (Date d = first; d <= last; ++d) {
    DemandFeatureRow row;
    if (fill_actual(view, d, row).empty()) rows.push_back(row);
  }
  return rows;
}

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& schema, const char* target) {
  out << "date";
  for (const auto& c : schema) out << ',' << c;
  out << ',' << target << '\n';
}

template <typename Row>
void write_rows(std::ostream& out, std::span<const Row> rows, auto target_of) {
  for (const auto& r : rows) {
    out << r.date.to_string();
    for (double v : feature_vector(r)) out << ',' << text::format_double(v);
    out << ',';
    if (auto t = target_of(r)) out << text::format_double(*t);
    out << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& out, std::span<const OccupancyFeatureRow> rows) {
  write_header(out, occupancy_schema(), "target_occupancy");
  write_rows(out, rows, [](const OccupancyFeatureRow& r) { return r.target_occupancy; });
}

void write_csv(std::ostream& out, std::span<const DemandFeatureRow> rows) {
  write_header(out, demand_schema(), "target_kwh");
  write_rows(out, rows, [](const DemandFeatureRow& r) { return r.target_kwh; });
}

}  // namespace netzero
