#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "netzero/datastore.hpp"
#include "netzero/error.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

using namespace netzero;
using netzero::testing::TempDir;

namespace {

FacilityConfig facility(const std::string& id = "f1") {
  FacilityConfig c;
  c.id = id;
  c.name = "Facility " + id;
  return c;
}

std::string meter_csv(std::initializer_list<std::pair<const char*, double>> rows, const std::string& id = "f1") {
  std::string s = "facility_id,timestamp,kwh\n";
  for (const auto& [ts, kwh] : rows) s += id + "," + ts + "," + std::to_string(kwh) + "\n";
  return s;
}

std::string full_month_csv(YearMonth m, double kwh, const std::string& id = "f1") {
  std::string s = "facility_id,timestamp,kwh\n";
  for (HourStamp h : hourly_grid(m)) s += id + "," + h.to_string() + "," + std::to_string(kwh) + "\n";
  return s;
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

}  // namespace

TEST(FacilityConfig, Validation) {
  EXPECT_NO_THROW(facility().validate());
  auto c = facility();
  c.retention_months = 2;
  EXPECT_THROW(c.validate(), Error);
  c = facility();
  c.imputation_mse_threshold = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = facility();
  c.emission_factor = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = facility("bad id");
  EXPECT_THROW(c.validate(), Error);
}

TEST(Ingest, AcceptsValidRows) {
  Store s;
  s.upsert_facility(facility());
  const auto rep = s.ingest("f1", DatasetKind::meter,
                            meter_csv({{"2021-01-01T00:00:00", 1.5}, {"2021-01-01T01:00:00", 2}, {"2021-01-01T02:00:00", 0}}));
  EXPECT_EQ(rep.accepted, 3u);
  EXPECT_EQ(rep.rejected, 0u);
  EXPECT_EQ(s.view("f1").raw().meter.size(), 3u);
}

TEST(Ingest, RejectsNegativeKwhWithReason) {
  Store s;
  s.upsert_facility(facility());
  const auto rep = s.ingest("f1", DatasetKind::meter, meter_csv({{"2021-01-01T00:00:00", 1}, {"2021-01-01T01:00:00", -5}}));
  EXPECT_EQ(rep.accepted, 1u);
  ASSERT_EQ(rep.rejected, 1u);
  EXPECT_EQ(rep.reasons[0].reason, "negative kwh");
  EXPECT_EQ(rep.reasons[0].line, 3u);
}

TEST(Ingest, DuplicateKeyWithinFileIsRejected) {
  Store s;
  s.upsert_facility(facility());
  const auto rep = s.ingest("f1", DatasetKind::meter, meter_csv({{"2021-01-01T00:00:00", 1}, {"2021-01-01T00:00:00", 2}}));
  EXPECT_EQ(rep.accepted, 1u);
  ASSERT_EQ(rep.rejected, 1u);
  EXPECT_NE(rep.reasons[0].reason.find("duplicate"), std::string::npos);
  EXPECT_EQ(s.view("f1").raw().meter.begin()->second.kwh, 1.0);
}

TEST(Ingest, MalformedHeaderIsSchemaErrorAndWritesNothing) {
  Store s;
  s.upsert_facility(facility());
  try {
    s.ingest("f1", DatasetKind::meter, std::string_view("facility,ts,kwh\nf1,2021-01-01T00:00:00,1\n"));
    FAIL() << "expected schema error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
  }
  EXPECT_TRUE(s.view("f1").raw().meter.empty());
}

TEST(Ingest, UnknownFacilityIsNotFound) {
  Store s;
  try {
    s.ingest("nope", DatasetKind::meter, meter_csv({}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_found);
  }
}

TEST(Ingest, RowLevelChecksPerDataset) {
  Store s;
  s.upsert_facility(facility());
  auto inv = s.ingest("f1", DatasetKind::invoice,
                      std::string_view("facility_id,month,total_kwh,green_kwh_billed,green_rate,conventional_rate\n"
                                       "f1,2021-01,100,80,5.00,8.00\n"
                                       "f1,2021-02,100,80,0,8.00\n"
                                       "f1,2021-03,-1,80,5.00,8.00\n"
                                       "other,2021-04,100,80,5.00,8.00\n"));
  EXPECT_EQ(inv.accepted, 1u);
  EXPECT_EQ(inv.rejected, 3u);
  const auto* rec = s.view("f1").invoice(YearMonth(2021, 1));
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ(rec->green_rate, 500);
  EXPECT_EQ(rec->conventional_rate, 800);

  auto w = s.ingest("f1", DatasetKind::weather,
                    std::string_view("facility_id,date,avg_temp,avg_precip,avg_humidity,avg_pressure\n"
                                     "f1,2021-01-01,25,0,60,1010\n"
                                     "f1,2021-01-02,25,0,160,1010\n"));
  EXPECT_EQ(w.accepted, 1u);
  EXPECT_EQ(w.rejected, 1u);

  auto sw = s.ingest("f1", DatasetKind::swipe,
                     std::string_view("facility_id,date,employee_swipes,visitor_count\nf1,2021-01-01,10,-1\n"));
  EXPECT_EQ(sw.rejected, 1u);
}

TEST(Ingest, ReingestingIdenticalFileIsIdempotentOnDisk) {
  TempDir dir("store");
  Store s(dir.path());
  s.upsert_facility(facility());
  const auto csv = full_month_csv(YearMonth(2021, 1), 3.25);
  s.ingest("f1", DatasetKind::meter, csv);
  const auto first = read_tree(dir.path());
  s.ingest("f1", DatasetKind::meter, csv);
  EXPECT_EQ(read_tree(dir.path()), first);
}

TEST(Ingest, LastWriteWinsAcrossFiles) {
  Store s;
  s.upsert_facility(facility());
  s.ingest("f1", DatasetKind::meter, meter_csv({{"2021-01-01T00:00:00", 1}}));
  s.ingest("f1", DatasetKind::meter, meter_csv({{"2021-01-01T00:00:00", 7}}));
  const auto& meter = s.view("f1").raw().meter;
  ASSERT_EQ(meter.size(), 1u);
  EXPECT_EQ(meter.begin()->second.kwh, 7.0);
}

TEST(Gaps, CompleteMonthHasNone) {
  Store s;
  s.upsert_facility(facility());
  s.ingest("f1", DatasetKind::meter, full_month_csv(YearMonth(2021, 4), 1.0));
  EXPECT_TRUE(s.find_gaps("f1", YearMonth(2021, 4)).empty());
}

TEST(Gaps, FourHoursAbsentOnDayFive) {
  Store s;
  s.upsert_facility(facility());
  std::string csv = "facility_id,timestamp,kwh\n";
  for (HourStamp h : hourly_grid(YearMonth(2021, 4))) {
    if (h.date().day() == 5 && h.hour() >= 10 && h.hour() <= 13) continue;
    csv += "f1," + h.to_string() + ",1\n";
  }
  s.ingest("f1", DatasetKind::meter, csv);
  const auto gaps = s.find_gaps("f1", YearMonth(2021, 4));
  ASSERT_EQ(gaps.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(gaps[i], HourStamp(Date::from_ymd(2021, 4, 5), 10 + i));
}

TEST(Gaps, EmptyMonthIsWholeGrid) {
  Store s;
  s.upsert_facility(facility());
  EXPECT_EQ(s.find_gaps("f1", YearMonth(2020, 2)), hourly_grid(YearMonth(2020, 2)));
  EXPECT_THROW(s.find_gaps("zz", YearMonth(2020, 2)), Error);
}

TEST(Gaps, PartitionTheGridWithObservedReadings) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Store s;
    s.upsert_facility(facility());
    const YearMonth m(2021, 1 + static_cast<unsigned>(trial % 12));
    std::string csv = "facility_id,timestamp,kwh\n";
    std::set<HourStamp> observed;
    for (HourStamp h : hourly_grid(m)) {
      if (rng() % 3 == 0) continue;
      observed.insert(h);
      csv += "f1," + h.to_string() + ",2\n";
    }
    s.ingest("f1", DatasetKind::meter, csv);
    const auto gaps = s.find_gaps("f1", m);
    EXPECT_TRUE(std::is_sorted(gaps.begin(), gaps.end()));
    std::set<HourStamp> all(observed);
    for (HourStamp g : gaps) EXPECT_TRUE(all.insert(g).second) << "gap overlaps an observed reading";
    const auto grid = hourly_grid(m);
    EXPECT_EQ(all, std::set<HourStamp>(grid.begin(), grid.end()));
  }
}

TEST(Prune, RetentionWindow) {
  Store s;
  auto c = facility();
  c.retention_months = 24;
  s.upsert_facility(c);
  s.ingest("f1", DatasetKind::swipe,
           std::string_view("facility_id,date,employee_swipes,visitor_count\nf1,2021-01-10,1,1\nf1,2021-06-10,1,1\n"));
  EXPECT_EQ(s.prune_history("f1", Date::from_ymd(2021, 7, 1)), 0u);

  c.retention_months = 6;
  s.upsert_facility(c);
  s.ingest("f1", DatasetKind::swipe, std::string_view("facility_id,date,employee_swipes,visitor_count\nf1,2020-12-01,1,1\n"));
  EXPECT_EQ(s.prune_history("f1", Date::from_ymd(2021, 7, 1)), 1u);
  EXPECT_EQ(s.prune_history("f1", Date::from_ymd(2021, 7, 1)), 0u);
  EXPECT_EQ(s.view("f1").raw().swipes.size(), 2u);
}

TEST(Prune, NeverRemovesRecordsInsideTheWindow) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    Store s;
    auto c = facility();
    c.retention_months = 3 + static_cast<int>(rng() % 20);
    s.upsert_facility(c);
    const Date as_of = Date::from_ymd(2022, 1 + static_cast<unsigned>(rng() % 12), 1 + static_cast<unsigned>(rng() % 28));
    std::string csv = "facility_id,date,employee_swipes,visitor_count\n";
    std::set<Date> dates;
    for (int i = 0; i < 60; ++i) dates.insert(as_of - static_cast<int>(rng() % 900));
    for (Date d : dates) csv += "f1," + d.to_string() + ",1,0\n";
    s.ingest("f1", DatasetKind::swipe, csv);
    s.prune_history("f1", as_of);

    const YearMonth back = YearMonth::of(as_of) - c.retention_months;
    const Date cutoff =
        Date::from_ymd(back.year(), back.month(), std::min<unsigned>(as_of.day(), static_cast<unsigned>(back.days())));
    const auto& kept = s.view("f1").raw().swipes;
    for (Date d : dates) EXPECT_EQ(kept.count(d) == 1, d >= cutoff) << d.to_string();
  }
}

TEST(WriteImputed, NeverOverwritesObserved) {
  Store s;
  s.upsert_facility(facility());
  s.ingest("f1", DatasetKind::meter, meter_csv({{"2021-01-01T00:00:00", 4}}));
  const HourStamp h0 = HourStamp::parse("2021-01-01T00:00:00");
  const HourStamp h1 = HourStamp::parse("2021-01-01T01:00:00");
  s.write_imputed("f1", {{h0, 99, Quality::imputed}, {h1, 3, Quality::imputed}});
  const auto& meter = s.view("f1").raw().meter;
  EXPECT_EQ(meter.at(h0).kwh, 4.0);
  EXPECT_EQ(meter.at(h0).quality, Quality::observed);
  EXPECT_EQ(meter.at(h1).kwh, 3.0);
  EXPECT_EQ(meter.at(h1).quality, Quality::imputed);
  // An imputed hour still counts as a gap: it has no observed reading.
  const auto gaps = s.find_gaps("f1", YearMonth(2021, 1));
  EXPECT_TRUE(std::binary_search(gaps.begin(), gaps.end(), h1));
}

TEST(Snapshot, ViewsAreIsolatedFromLaterWrites) {
  Store s;
  s.upsert_facility(facility());
  s.ingest("f1", DatasetKind::meter, meter_csv({{"2021-01-01T00:00:00", 1}}));
  const auto before = s.view("f1");
  s.ingest("f1", DatasetKind::meter, meter_csv({{"2021-01-01T01:00:00", 1}}));
  EXPECT_EQ(before.raw().meter.size(), 1u);
  EXPECT_EQ(s.view("f1").raw().meter.size(), 2u);
}

TEST(Disk, ReopenedStoreMatchesAndRewritesNothing) {
  TempDir dir("store");
  const auto synth = netzero::testing::make_synthetic({.months = 3});
  {
    Store s(dir.path());
    netzero::testing::load_into(s, synth);
  }
  const auto files = read_tree(dir.path());
  Store reopened(dir.path());
  const auto& data = reopened.view("synth").raw();
  EXPECT_EQ(data.meter.size(), static_cast<std::size_t>(31 + 28 + 31) * 24);
  EXPECT_EQ(data.invoices.size(), 3u);
  EXPECT_EQ(data.config, synth.config);
  reopened.upsert_facility(synth.config);  // unchanged config: no write
  EXPECT_EQ(read_tree(dir.path()), files);

  TempDir copy("copy");
  reopened.save_to(copy.path());
  EXPECT_EQ(read_tree(copy.path()), files);
}

TEST(AccessLog, RecordsStagesAndLatestRead) {
  Store s;
  s.upsert_facility(facility());
  s.ingest("f1", DatasetKind::meter, full_month_csv(YearMonth(2021, 1), 1.0));
  AccessLog log;
  const auto v = s.view("f1", &log);
  v.stage("a");
  v.meter(Date::from_ymd(2021, 1, 1), Date::from_ymd(2021, 1, 3));
  v.stage("b");
  v.swipe(Date::from_ymd(2021, 1, 9));
  ASSERT_EQ(log.entries().size(), 2u);
  EXPECT_EQ(log.count(DatasetKind::meter, "a"), 1u);
  EXPECT_EQ(log.count(DatasetKind::swipe, "a"), 0u);
  EXPECT_EQ(log.count(DatasetKind::swipe, "b"), 1u);
  EXPECT_EQ(*log.latest(), Date::from_ymd(2021, 1, 9));
}

TEST(FacilityView, DailyKwhNeedsAllHours) {
  Store s;
  s.upsert_facility(facility());
  s.ingest("f1", DatasetKind::meter, full_month_csv(YearMonth(2021, 1), 0.5));
  const auto v = s.view("f1");
  EXPECT_DOUBLE_EQ(*v.daily_kwh(Date::from_ymd(2021, 1, 4)), 12.0);
  EXPECT_FALSE(v.daily_kwh(Date::from_ymd(2021, 2, 1)));
  EXPECT_EQ(*v.data_start(), Date::from_ymd(2021, 1, 1));
}
