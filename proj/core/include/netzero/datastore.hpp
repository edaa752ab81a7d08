#pragma once

// Unified per-facility repository: meter, invoice, swipe, weather and
// calendar data ingested from CSV files, with gap detection, retention
// pruning and an optional on-disk mirror.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "netzero/calendar.hpp"

namespace netzero {

using FacilityId = std::string;

/// Money in integer minor units (1/100 of the currency).
using Minor = std::int64_t;

enum class DatasetKind { meter, invoice, swipe, weather, calendar };
enum class Quality { observed, imputed, missing };

const char* to_string(DatasetKind kind);
const char* to_string(Quality q);
DatasetKind parse_dataset_kind(std::string_view s);

struct MeterReading {
  HourStamp timestamp;
  double kwh = 0.0;
  Quality quality = Quality::observed;

  bool operator==(const MeterReading&) const = default;
};

struct InvoiceRecord {
  YearMonth month;
  double total_kwh = 0.0;
  double green_kwh_billed = 0.0;
  Minor green_rate = 0;         // minor units per kWh
  Minor conventional_rate = 0;  // minor units per kWh

  bool operator==(const InvoiceRecord&) const = default;
};

struct SwipeRecord {
  Date date;
  std::int64_t employee_swipes = 0;
  std::int64_t visitor_count = 0;

  bool operator==(const SwipeRecord&) const = default;
};

struct WeatherRecord {
  Date date;
  double avg_temp = 0.0;      // deg C
  double avg_precip = 0.0;    // mm
  double avg_humidity = 0.0;  // percent
  double avg_pressure = 0.0;  // hPa

  bool operator==(const WeatherRecord&) const = default;
};

struct CalendarRecord {
  Date date;
  bool is_holiday = false;
  std::int64_t event_count = 0;
  bool lockdown_flag = false;

  bool operator==(const CalendarRecord&) const = default;
};

struct FacilityConfig {
  FacilityId id;
  std::string name;
  int retention_months = 24;
  double imputation_mse_threshold = 0.01;
  double emission_factor = 0.82;  // kgCO2e per kWh; set per facility
  std::string time_zone = "Asia/Kolkata";
  std::string currency = "INR";

  /// Throws Error(invalid_argument) when an invariant does not hold.
  void validate() const;

  bool operator==(const FacilityConfig&) const = default;
};

struct FacilityData {
  FacilityConfig config;
  std::map<HourStamp, MeterReading> meter;
  std::map<YearMonth, InvoiceRecord> invoices;
  std::map<Date, SwipeRecord> swipes;
  std::map<Date, WeatherRecord> weather;
  std::map<Date, CalendarRecord> calendar;

  bool operator==(const FacilityData&) const = default;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<RejectedRow> reasons;
};

/// Receives a callback for every dated read made through a FacilityView.
/// Used to prove that model selection never looks past its cutoff and that
/// demand inference never touches swipe data.
class AccessObserver {
 public:
  virtual ~AccessObserver() = default;
  virtual void on_read(DatasetKind kind, Date first, Date last) = 0;
  virtual void on_stage(std::string_view /*stage*/) {}
};

/// Records every read with the stage that was active when it happened.
class AccessLog : public AccessObserver {
 public:
  struct Entry {
    std::string stage;
    DatasetKind kind;
    Date first;
    Date last;
  };

  void on_read(DatasetKind kind, Date first, Date last) override;
  void on_stage(std::string_view stage) override { stage_ = stage; }

  const std::vector<Entry>& entries() const { return entries_; }
  /// Latest date touched by any read, if any read happened.
  std::optional<Date> latest() const;
  std::size_t count(DatasetKind kind, std::string_view stage = {}) const;

 private:
  std::string stage_;
  std::vector<Entry> entries_;
};

/// Immutable snapshot of one facility. Every dated accessor reports the
/// range it touched to the observer, if one is attached.
class FacilityView {
 public:
  FacilityView(std::shared_ptr<const FacilityData> data, AccessObserver* observer)
      : data_(std::move(data)), observer_(observer) {}

  const FacilityConfig& config() const { return data_->config; }
  const FacilityData& raw() const { return *data_; }
  AccessObserver* observer() const { return observer_; }
  void stage(std::string_view name) const {
    if (observer_) observer_->on_stage(name);
  }

  /// Readings whose timestamp falls on [first, last].
  std::vector<MeterReading> meter(Date first, Date last) const;
  /// Sum of the day's 24 hourly readings, or empty unless every hour holds a
  /// non-missing reading.
  std::optional<double> daily_kwh(Date d) const;
  /// True when any of the day's hours was filled by imputation.
  bool day_has_imputed(Date d) const;

  const InvoiceRecord* invoice(YearMonth m) const;
  const SwipeRecord* swipe(Date d) const;
  const WeatherRecord* weather(Date d) const;
  const CalendarRecord* calendar(Date d) const;

  std::vector<WeatherRecord> weather_between(Date first, Date last) const;
  std::vector<SwipeRecord> swipes_between(Date first, Date last) const;

  /// Earliest date held by any dataset; metadata only, not reported.
  std::optional<Date> data_start() const;

 private:
  void note(DatasetKind kind, Date first, Date last) const {
    if (observer_) observer_->on_read(kind, first, last);
  }

  std::shared_ptr<const FacilityData> data_;
  AccessObserver* observer_ = nullptr;
};

/// Thread-safe repository. Writes are serialised per facility; readers take
/// a snapshot (FacilityView) that later writes never disturb. When opened on
/// a directory every write is mirrored to disk before it becomes visible.
class Store {
 public:
  static constexpr int kFormatVersion = 1;

  Store() = default;
  /// Opens (or initialises) a store directory and loads its contents.
  explicit Store(std::filesystem::path dir);
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::optional<std::filesystem::path>& directory() const { return dir_; }

  /// Registers a facility or replaces its configuration.
  void upsert_facility(const FacilityConfig& config);
  bool has_facility(std::string_view id) const;
  std::vector<FacilityConfig> facilities() const;

  /// Throws Error(not_found) for unknown facilities.
  FacilityView view(std::string_view id, AccessObserver* observer = nullptr) const;

  /// Throws Error(schema) on a malformed header; row-level problems are
  /// reported and the row skipped. Valid rows are applied all at once.
  IngestReport ingest(std::string_view id, DatasetKind kind, std::istream& csv);
  IngestReport ingest(std::string_view id, DatasetKind kind, std::string_view csv);

  /// Hourly slots of `month` without an observed reading, ascending.
  std::vector<HourStamp> find_gaps(std::string_view id, YearMonth month) const;

  /// Removes records dated before `as_of` minus the retention window.
  std::size_t prune_history(std::string_view id, Date as_of);

  /// Upserts imputed readings. Never overwrites an observed reading.
  void write_imputed(std::string_view id, const std::vector<MeterReading>& readings);

  /// Serialises the whole store into `dir` (same layout the mirror uses).
  void save_to(const std::filesystem::path& dir) const;

 private:
  struct Slot {
    std::mutex write_mutex;
    std::shared_ptr<const FacilityData> data;
  };

  std::shared_ptr<Slot> slot(std::string_view id) const;
  template <typename Fn>
  void mutate(std::string_view id, Fn&& fn);
  void persist(const FacilityData& data) const;
  void load(const std::filesystem::path& dir);

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<FacilityId, std::shared_ptr<Slot>, std::less<>> slots_;
};

/// CSV header expected for each dataset kind.
std::string_view csv_header(DatasetKind kind);

/// Writes `data` to `dir/facilities/<id>/` in the documented layout.
void write_facility(const std::filesystem::path& dir, const FacilityData& data);
FacilityData read_facility(const std::filesystem::path& facility_dir);

/// Writes via a temporary file and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// True for ids made of letters, digits, '-' and '_'.
bool valid_facility_id(std::string_view id);

}  // namespace netzero
