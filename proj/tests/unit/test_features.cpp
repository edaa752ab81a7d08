#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "netzero/error.hpp"
#include "netzero/features.hpp"
#include "netzero/text.hpp"
#include "synthetic.hpp"

using namespace netzero;

namespace {

struct DayData {
  double kwh = 240.0;
  std::int64_t employees = 100;
  std::int64_t visitors = 10;
  double temp = 25.0;
  bool holiday = false;
  bool metered = true;
};

// Builds CSVs for [first, last] from a per-day generator and loads them.
template <typename Gen>
void load_days(Store& s, Date first, Date last, Gen gen, bool with_calendar = true, bool with_swipes = true) {
  std::string meter = "facility_id,timestamp,kwh\n";
  std::string swipe = "facility_id,date,employee_swipes,visitor_count\n";
  std::string weather = "facility_id,date,avg_temp,avg_precip,avg_humidity,avg_pressure\n";
  std::string cal = "facility_id,date,is_holiday,event_count,lockdown_flag\n";
  for (Date d = first; d <= last; ++d) {
    const DayData x = gen(d);
    // Hour 0 carries the remainder so the day sums to exactly x.kwh.
    const double hourly = x.kwh / 32.0;
    for (int h = 0; h < 24 && x.metered; ++h) {
      meter += "f1," + HourStamp(d, h).to_string() + "," + text::format_double(h == 0 ? x.kwh - 23 * hourly : hourly) + "\n";
    }
    swipe += "f1," + d.to_string() + "," + std::to_string(x.employees) + "," + std::to_string(x.visitors) + "\n";
    weather += "f1," + d.to_string() + "," + std::to_string(x.temp) + ",1,50,1010\n";
    cal += "f1," + d.to_string() + "," + (x.holiday ? "true" : "false") + ",0,false\n";
  }
  s.ingest("f1", DatasetKind::meter, meter);
  if (with_swipes) s.ingest("f1", DatasetKind::swipe, swipe);
  s.ingest("f1", DatasetKind::weather, weather);
  if (with_calendar) s.ingest("f1", DatasetKind::calendar, cal);
}

Store& fresh(Store& s) {
  FacilityConfig c;
  c.id = "f1";
  s.upsert_facility(c);
  return s;
}

}  // namespace

TEST(Schema, FixedColumnOrder) {
  EXPECT_EQ(occupancy_schema(), (std::vector<std::string>{"day_of_week", "month_of_year", "is_holiday", "event_count",
                                                          "visitor_count", "lockdown_flag"}));
  EXPECT_EQ(demand_schema().size(), 9u);
  EXPECT_EQ(demand_schema().front(), "occupancy");
  EXPECT_EQ(demand_schema().back(), "recent_trend");

  DemandFeatureRow r;
  r.occupancy = 5;
  r.day_of_week = 2;
  r.avg_temp = 30;
  r.recent_trend = 123;
  const auto v = feature_vector(r);
  EXPECT_EQ(v[0], 5.0);
  EXPECT_EQ(v[1], 2.0);
  EXPECT_EQ(v[4], 30.0);
  EXPECT_EQ(v[8], 123.0);
}

TEST(Occupancy, OneRowPerDateWithTargetsAndHolidays) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 3, 1);
  load_days(s, first, first + 6, [&](Date d) {
    DayData x;
    x.holiday = d == first + 2;
    return x;
  });
  const auto rows = build_occupancy_rows(s.view("f1"), {first, first + 6});
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_TRUE(rows[2].is_holiday);
  EXPECT_FALSE(rows[3].is_holiday);
  for (const auto& r : rows) {
    EXPECT_EQ(*r.target_occupancy, 110.0);
    EXPECT_EQ(r.visitor_count, 10.0);
    EXPECT_EQ(r.month_of_year, 3);
  }
}

TEST(Occupancy, FutureDatesUseWeekdayMeanVisitors) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 3, 1);  // Monday
  load_days(s, first, first + 13, [&](Date d) {
    DayData x;
    x.visitors = d.weekday() == 0 ? (d == first ? 10 : 30) : 5;
    return x;
  });
  // Calendar only for the future week.
  std::string cal = "facility_id,date,is_holiday,event_count,lockdown_flag\n";
  for (Date d = first + 14; d <= first + 20; ++d) cal += "f1," + d.to_string() + ",false,1,false\n";
  s.ingest("f1", DatasetKind::calendar, cal);

  const auto rows = build_occupancy_rows(s.view("f1"), {first + 14, first + 20});
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_FALSE(rows[0].target_occupancy);
  EXPECT_EQ(rows[0].visitor_count, 20.0);  // Mondays had 10 and 30
  EXPECT_EQ(rows[1].visitor_count, 5.0);
}

TEST(Occupancy, MissingCalendarListsEveryDate) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 3, 1);
  load_days(s, first, first + 2, [](Date) { return DayData{}; }, false);
  try {
    build_occupancy_rows(s.view("f1"), {first, first + 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
    const std::string msg = e.what();
    for (int k = 0; k < 3; ++k) EXPECT_NE(msg.find((first + k).to_string()), std::string::npos) << msg;
  }
}

TEST(Trend, ConstantHistory) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 1, 1);
  load_days(s, first, first + 30, [](Date) { return DayData{}; });
  const auto rows = build_demand_rows(s.view("f1"), {first + 7, first + 30}, OccupancySource::actual);
  ASSERT_EQ(rows.size(), 24u);
  for (const auto& r : rows) EXPECT_NEAR(r.recent_trend, 240.0, 1e-9);
}

TEST(Trend, ArithmeticMeanOfPriorWeek) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 1, 1);
  load_days(s, first, first + 7, [&](Date d) {
    DayData x;
    x.kwh = 100.0 + 10.0 * (d - first);
    return x;
  });
  EXPECT_NEAR(*trailing_week_mean(s.view("f1"), first + 7), 130.0, 1e-9);
  EXPECT_FALSE(trailing_week_mean(s.view("f1"), first + 6));
  EXPECT_THROW(build_demand_rows(s.view("f1"), {first + 6, first + 7}, OccupancySource::actual), Error);
}

TEST(Trend, FrozenAtLastObservedWeekForInference) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 1, 1);
  load_days(s, first, first + 30, [&](Date d) {
    DayData x;
    x.kwh = d >= first + 24 ? 500.0 : 100.0;
    return x;
  });
  const Date target = first + 31;  // 2021-02-01
  std::string cal = "facility_id,date,is_holiday,event_count,lockdown_flag\n";
  std::map<Date, double> occ;
  for (Date d = target; d <= target + 27; ++d) {
    cal += "f1," + d.to_string() + ",false,0,false\n";
    occ[d] = 110.0;
  }
  s.ingest("f1", DatasetKind::calendar, cal);
  const auto rows = build_demand_rows(s.view("f1"), {target, target + 27}, OccupancySource::forecast, &occ);
  ASSERT_EQ(rows.size(), 28u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.recent_trend, 500.0, 1e-9);
    EXPECT_FALSE(r.target_kwh);
  }
  EXPECT_NEAR(*frozen_trend(s.view("f1"), target), 500.0, 1e-9);
}

TEST(Trend, IndependentOfIngestionOrder) {
  const Date first = Date::from_ymd(2021, 1, 1);
  std::vector<std::string> lines;
  std::mt19937_64 rng(3);
  for (Date d = first; d <= first + 20; ++d) {
    for (int h = 0; h < 24; ++h) lines.push_back("f1," + HourStamp(d, h).to_string() + "," + std::to_string(rng() % 50) + "\n");
  }
  auto build = [&](const std::vector<std::string>& order) {
    Store s;
    fresh(s);
    load_days(s, first, first + 20, [](Date) { return DayData{}; });
    std::string csv = "facility_id,timestamp,kwh\n";
    for (const auto& l : order) csv += l;
    s.ingest("f1", DatasetKind::meter, csv);
    return build_demand_rows(s.view("f1"), {first + 7, first + 20}, OccupancySource::actual);
  };
  auto shuffled = lines;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(build(lines), build(shuffled));
}

TEST(Weather, ClimatologyLadder) {
  Store s;
  fresh(s);
  // Two years of history for 10-20 March; the target year has none.
  std::string w = "facility_id,date,avg_temp,avg_precip,avg_humidity,avg_pressure\n";
  for (int y : {2019, 2020}) {
    for (unsigned day = 10; day <= 20; ++day) {
      w += "f1," + Date::from_ymd(y, 3, day).to_string() + "," + std::to_string(y == 2019 ? 20 + day : 22 + day) +
           ",0,50,1000\n";
    }
  }
  s.ingest("f1", DatasetKind::weather, w);
  const auto v = s.view("f1");
  EXPECT_DOUBLE_EQ(inference_weather(v, Date::from_ymd(2021, 3, 12)).avg_temp, 33.0);  // same day-of-month
  EXPECT_DOUBLE_EQ(inference_weather(v, Date::from_ymd(2021, 3, 25)).avg_temp, 36.0);  // month mean
  EXPECT_DOUBLE_EQ(inference_weather(v, Date::from_ymd(2021, 5, 1)).avg_temp, 36.0);   // overall mean
  EXPECT_DOUBLE_EQ(inference_weather(v, Date::from_ymd(2020, 3, 15)).avg_temp, 37.0);  // recorded value
}

TEST(Demand, ForecastModeNeverReadsSwipes) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 1, 1);
  load_days(s, first, first + 40, [](Date) { return DayData{}; });
  std::map<Date, double> occ;
  for (Date d = first + 31; d <= first + 40; ++d) occ[d] = 99.0;
  AccessLog log;
  const auto rows = build_demand_rows(s.view("f1", &log), {first + 31, first + 40}, OccupancySource::forecast, &occ);
  EXPECT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0].occupancy, 99.0);
  EXPECT_EQ(log.count(DatasetKind::swipe), 0u);
  EXPECT_GT(log.count(DatasetKind::meter), 0u);
}

TEST(Demand, TrainingRowsSkipIncompleteDays) {
  Store s;
  fresh(s);
  const Date first = Date::from_ymd(2021, 1, 1);
  const Date unmetered = first + 10;
  load_days(s, first, first + 20, [&](Date d) {
    DayData x;
    x.metered = d != unmetered;
    return x;
  });
  const auto rows = demand_training_rows(s.view("f1"), first, first + 20);
  // Days 0-6 lack a full lookback week, day 10 has no meter data and days
  // 11-17 have it inside their lookback.
  std::vector<Date> dates;
  for (const auto& r : rows) dates.push_back(r.date);
  EXPECT_EQ(dates, (std::vector<Date>{first + 7, first + 8, first + 9, first + 18, first + 19, first + 20}));
  for (const auto& r : rows) EXPECT_EQ(*r.target_kwh, 240.0);
}

TEST(Rows, CountEqualsRangeDays) {
  auto synth = netzero::testing::make_synthetic({.months = 3});
  Store s;
  netzero::testing::load_into(s, synth);
  const auto v = s.view("synth");
  for (int len : {1, 5, 17, 40}) {
    const DateRange r{Date::from_ymd(2019, 2, 1), Date::from_ymd(2019, 2, 1) + (len - 1)};
    EXPECT_EQ(build_occupancy_rows(v, r).size(), static_cast<std::size_t>(len));
    EXPECT_EQ(build_demand_rows(v, r, OccupancySource::actual).size(), static_cast<std::size_t>(len));
  }
}

TEST(Export, CsvHeaderFollowsSchema) {
  OccupancyFeatureRow r;
  r.date = Date::from_ymd(2021, 1, 4);
  r.visitor_count = 3;
  r.target_occupancy = 50;
  std::ostringstream out;
  write_csv(out, std::span<const OccupancyFeatureRow>(&r, 1));
  EXPECT_EQ(out.str(),
            "date,day_of_week,month_of_year,is_holiday,event_count,visitor_count,lockdown_flag,target_occupancy\n"
            "2021-01-04,0,1,0,0,3,0,50\n");
}
