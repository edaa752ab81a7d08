#include "netzero/datastore.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "netzero/error.hpp"
#include "netzero/json_io.hpp"
#include "netzero/text.hpp"

namespace netzero {

namespace fs = std::filesystem;

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::meter: return "meter";
    case DatasetKind::invoice: return "invoice";
    case DatasetKind::swipe: return "swipe";
    case DatasetKind::weather: return "weather";
    case DatasetKind::calendar: return "calendar";
  }
  return "?";
}

const char* to_string(Quality q) {
  switch (q) {
    case Quality::observed: return "observed";
    case Quality::imputed: return "imputed";
    case Quality::missing: return "missing";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view s) {
  for (auto k : {DatasetKind::meter, DatasetKind::invoice, DatasetKind::swipe,
                 DatasetKind::weather, DatasetKind::calendar}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorKind::invalid_argument, "unknown dataset kind '" + std::string(s) + "'");
}

std::string_view csv_header(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::meter: return "facility_id,timestamp,kwh";
    case DatasetKind::invoice:
      return "facility_id,month,total_kwh,green_kwh_billed,green_rate,conventional_rate";
    case DatasetKind::swipe: return "facility_id,date,employee_swipes,visitor_count";
    case DatasetKind::weather:
      return "facility_id,date,avg_temp,avg_precip,avg_humidity,avg_pressure";
    case DatasetKind::calendar: return "facility_id,date,is_holiday,event_count,lockdown_flag";
  }
  return {};
}

bool valid_facility_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_';
  });
}

void FacilityConfig::validate() const {
  if (!valid_facility_id(id)) fail(ErrorKind::invalid_argument, "invalid facility id '" + id + "'");
  if (retention_months < 3) fail(ErrorKind::invalid_argument, "retention_months must be >= 3");
  if (!(imputation_mse_threshold > 0.0 && imputation_mse_threshold < 1.0)) {
    fail(ErrorKind::invalid_argument, "imputation_mse_threshold must lie in (0, 1)");
  }
  if (!(emission_factor > 0.0)) fail(ErrorKind::invalid_argument, "emission_factor must be > 0");
}

// ---------------------------------------------------------------------------
// AccessLog / FacilityView

void AccessLog::on_read(DatasetKind kind, Date first, Date last) {
  entries_.push_back({stage_, kind, first, last});
}

std::optional<Date> AccessLog::latest() const {
  std::optional<Date> out;
  for (const auto& e : entries_) {
    if (!out || e.last > *out) out = e.last;
  }
  return out;
}

std::size_t AccessLog::count(DatasetKind kind, std::string_view stage) const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [&](const Entry& e) {
    return e.kind == kind && (stage.empty() || e.stage == stage);
  }));
}

std::vector<MeterReading> FacilityView::meter(Date first, Date last) const {
  note(DatasetKind::meter, first, last);
  std::vector<MeterReading> out;
  auto it = data_->meter.lower_bound(HourStamp(first, 0));
  auto end = data_->meter.lower_bound(HourStamp(last + 1, 0));
  for (; it != end; ++it) out.push_back(it->second);
  return out;
}

std::optional<double> FacilityView::daily_kwh(Date d) const {
  note(DatasetKind::meter, d, d);
  auto it = data_->meter.lower_bound(HourStamp(d, 0));
  auto end = data_->meter.lower_bound(HourStamp(d + 1, 0));
  double sum = 0.0;
  int hours = 0;
  for (; it != end; ++it) {
    if (it->second.quality == Quality::missing) return std::nullopt;
    sum += it->second.kwh;
    ++hours;
  }
  if (hours != 24) return std::nullopt;
  return sum;
}

bool FacilityView::day_has_imputed(Date d) const {
  note(DatasetKind::meter, d, d);
  auto it = data_->meter.lower_bound(HourStamp(d, 0));
  auto end = data_->meter.lower_bound(HourStamp(d + 1, 0));
  return std::any_of(it, end, [](const auto& kv) { return kv.second.quality == Quality::imputed; });
}

const InvoiceRecord* FacilityView::invoice(YearMonth m) const {
  note(DatasetKind::invoice, m.first_day(), m.last_day());
  auto it = data_->invoices.find(m);
  return it == data_->invoices.end() ? nullptr : &it->second;
}

const SwipeRecord* FacilityView::swipe(Date d) const {
  note(DatasetKind::swipe, d, d);
  auto it = data_->swipes.find(d);
  return it == data_->swipes.end() ? nullptr : &it->second;
}

const WeatherRecord* FacilityView::weather(Date d) const {
  note(DatasetKind::weather, d, d);
  auto it = data_->weather.find(d);
  return it == data_->weather.end() ? nullptr : &it->second;
}

const CalendarRecord* FacilityView::calendar(Date d) const {
  note(DatasetKind::calendar, d, d);
  auto it = data_->calendar.find(d);
  return it == data_->calendar.end() ? nullptr : &it->second;
}

std::vector<WeatherRecord> FacilityView::weather_between(Date first, Date last) const {
  note(DatasetKind::weather, first, last);
  std::vector<WeatherRecord> out;
  for (auto it = data_->weather.lower_bound(first); it != data_->weather.end() && it->first <= last; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<SwipeRecord> FacilityView::swipes_between(Date first, Date last) const {
  note(DatasetKind::swipe, first, last);
  std::vector<SwipeRecord> out;
  for (auto it = data_->swipes.lower_bound(first); it != data_->swipes.end() && it->first <= last; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::optional<Date> FacilityView::data_start() const {
  std::optional<Date> out;
  auto consider = [&](Date d) {
    if (!out || d < *out) out = d;
  };
  if (!data_->meter.empty()) consider(data_->meter.begin()->first.date());
  if (!data_->swipes.empty()) consider(data_->swipes.begin()->first);
  if (!data_->weather.empty()) consider(data_->weather.begin()->first);
  if (!data_->calendar.empty()) consider(data_->calendar.begin()->first);
  if (!data_->invoices.empty()) consider(data_->invoices.begin()->first.first_day());
  return out;
}

// ---------------------------------------------------------------------------
// Row parsing. Each parser returns an empty string on success, otherwise the
// rejection reason.

namespace {

using Fields = std::vector<std::string>;

std::string parse_row(const Fields& f, MeterReading& out) {
  try {
    out.timestamp = HourStamp::parse(f[1]);
  } catch (const Error& e) {
    return e.what();
  }
  if (f[2].empty()) {
    out.kwh = 0.0;
    out.quality = Quality::missing;
    return {};
  }
  auto kwh = text::parse_double(f[2]);
  if (!kwh) return "invalid kwh '" + f[2] + "'";
  if (*kwh < 0) return "negative kwh";
  out.kwh = *kwh;
  out.quality = Quality::observed;
  return {};
}

std::string parse_row(const Fields& f, InvoiceRecord& out) {
  try {
    out.month = YearMonth::parse(f[1]);
  } catch (const Error& e) {
    return e.what();
  }
  auto total = text::parse_double(f[2]);
  auto green = text::parse_double(f[3]);
  if (!total) return "invalid total_kwh";
  if (!green) return "invalid green_kwh_billed";
  if (*total < 0) return "negative total_kwh";
  if (*green < 0) return "negative green_kwh_billed";
  auto gr = text::parse_minor(f[4]);
  auto cr = text::parse_minor(f[5]);
  if (!gr) return "invalid green_rate";
  if (!cr) return "invalid conventional_rate";
  if (*gr <= 0 || *cr <= 0) return "rates must be positive";
  out.total_kwh = *total;
  out.green_kwh_billed = *green;
  out.green_rate = *gr;
  out.conventional_rate = *cr;
  return {};
}

std::string parse_row(const Fields& f, SwipeRecord& out) {
  try {
    out.date = Date::parse(f[1]);
  } catch (const Error& e) {
    return e.what();
  }
  auto s = text::parse_int(f[2]);
  auto v = text::parse_int(f[3]);
  if (!s || !v) return "invalid count";
  if (*s < 0 || *v < 0) return "negative count";
  out.employee_swipes = *s;
  out.visitor_count = *v;
  return {};
}

std::string parse_row(const Fields& f, WeatherRecord& out) {
  try {
    out.date = Date::parse(f[1]);
  } catch (const Error& e) {
    return e.what();
  }
  auto t = text::parse_double(f[2]);
  auto p = text::parse_double(f[3]);
  auto h = text::parse_double(f[4]);
  auto pr = text::parse_double(f[5]);
  if (!t || !p || !h || !pr) return "invalid weather value";
  if (*h < 0 || *h > 100) return "humidity outside [0,100]";
  out.avg_temp = *t;
  out.avg_precip = *p;
  out.avg_humidity = *h;
  out.avg_pressure = *pr;
  return {};
}

std::string parse_row(const Fields& f, CalendarRecord& out) {
  try {
    out.date = Date::parse(f[1]);
  } catch (const Error& e) {
    return e.what();
  }
  auto hol = text::parse_bool(f[2]);
  auto ev = text::parse_int(f[3]);
  auto lock = text::parse_bool(f[4]);
  if (!hol) return "invalid is_holiday";
  if (!ev) return "invalid event_count";
  if (*ev < 0) return "negative event_count";
  if (!lock) return "invalid lockdown_flag";
  out.is_holiday = *hol;
  out.event_count = *ev;
  out.lockdown_flag = *lock;
  return {};
}

auto key_of(const MeterReading& r) { return r.timestamp; }
auto key_of(const InvoiceRecord& r) { return r.month; }
auto key_of(const SwipeRecord& r) { return r.date; }
auto key_of(const WeatherRecord& r) { return r.date; }
auto key_of(const CalendarRecord& r) { return r.date; }

std::string key_text(HourStamp h) { return h.to_string(); }
std::string key_text(YearMonth m) { return m.to_string(); }
std::string key_text(Date d) { return d.to_string(); }

auto& table_of(FacilityData& d, const MeterReading*) { return d.meter; }
auto& table_of(FacilityData& d, const InvoiceRecord*) { return d.invoices; }
auto& table_of(FacilityData& d, const SwipeRecord*) { return d.swipes; }
auto& table_of(FacilityData& d, const WeatherRecord*) { return d.weather; }
auto& table_of(FacilityData& d, const CalendarRecord*) { return d.calendar; }

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) lines.front().erase(0, 3);
  return lines;
}

bool header_matches(const std::string& line, std::string_view expected, std::size_t extra_ok) {
  auto got = text::split_csv(line);
  auto want = text::split_csv(expected);
  if (got.size() < want.size() || got.size() > want.size() + extra_ok) return false;
  return std::equal(want.begin(), want.end(), got.begin());
}

template <typename Record>
struct Parsed {
  std::vector<Record> rows;
  IngestReport report;
};

template <typename Record>
Parsed<Record> parse_table(const std::vector<std::string>& lines, std::string_view facility,
                           std::size_t n_fields) {
  Parsed<Record> out;
  using Key = decltype(key_of(std::declval<Record>()));
  std::set<Key> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    auto reject = [&](std::string reason) {
      ++out.report.rejected;
      out.report.reasons.push_back({i + 1, std::move(reason)});
    };
    auto fields = text::split_csv(lines[i]);
    if (fields.size() != n_fields) {
      reject("expected " + std::to_string(n_fields) + " fields, got " + std::to_string(fields.size()));
      continue;
    }
    if (fields[0] != facility) {
      reject("facility mismatch '" + fields[0] + "'");
      continue;
    }
    Record rec{};
    if (auto reason = parse_row(fields, rec); !reason.empty()) {
      reject(std::move(reason));
      continue;
    }
    if (!seen.insert(key_of(rec)).second) {
      reject("duplicate key " + key_text(key_of(rec)));
      continue;
    }
    out.rows.push_back(rec);
    ++out.report.accepted;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Store

Store::Store(fs::path dir) : dir_(std::move(dir)) {
  const fs::path version_file = *dir_ / "FORMAT";
  if (fs::exists(version_file)) {
    load(*dir_);
  } else {
    fs::create_directories(*dir_ / "facilities");
    write_file_atomic(version_file, "netzero-store " + std::to_string(kFormatVersion) + "\n");
  }
}

Store::~Store() = default;

std::shared_ptr<Store::Slot> Store::slot(std::string_view id) const {
  std::shared_lock lock(map_mutex_);
  auto it = slots_.find(id);
  if (it == slots_.end()) fail(ErrorKind::not_found, "unknown facility '" + std::string(id) + "'");
  return it->second;
}

template <typename Fn>
void Store::mutate(std::string_view id, Fn&& fn) {
  auto s = slot(id);
  std::lock_guard write(s->write_mutex);
  std::shared_ptr<const FacilityData> current;
  {
    std::shared_lock lock(map_mutex_);
    current = s->data;
  }
  auto next = std::make_shared<FacilityData>(*current);
  if (!fn(*next)) return;
  persist(*next);
  std::unique_lock lock(map_mutex_);
  s->data = std::move(next);
}

void Store::upsert_facility(const FacilityConfig& config) {
  config.validate();
  std::shared_ptr<Slot> s;
  {
    std::unique_lock lock(map_mutex_);
    auto& entry = slots_[config.id];
    if (!entry) {
      entry = std::make_shared<Slot>();
      auto data = std::make_shared<FacilityData>();
      data->config = config;
      entry->data = data;
      lock.unlock();
      persist(*data);
      return;
    }
    s = entry;
  }
  mutate(config.id, [&](FacilityData& d) {
    if (d.config == config) return false;
    d.config = config;
    return true;
  });
}

bool Store::has_facility(std::string_view id) const {
  std::shared_lock lock(map_mutex_);
  return slots_.find(id) != slots_.end();
}

std::vector<FacilityConfig> Store::facilities() const {
  std::shared_lock lock(map_mutex_);
  std::vector<FacilityConfig> out;
  for (const auto& [id, s] : slots_) out.push_back(s->data->config);
  return out;
}

FacilityView Store::view(std::string_view id, AccessObserver* observer) const {
  auto s = slot(id);
  std::shared_lock lock(map_mutex_);
  return FacilityView(s->data, observer);
}

IngestReport Store::ingest(std::string_view id, DatasetKind kind, std::string_view csv) {
  std::istringstream in{std::string(csv)};
  return ingest(id, kind, in);
}

IngestReport Store::ingest(std::string_view id, DatasetKind kind, std::istream& csv) {
  slot(id);  // not_found before parsing
  auto lines = read_lines(csv);
  const auto header = csv_header(kind);
  if (lines.empty() || !header_matches(lines.front(), header, 0)) {
    fail(ErrorKind::schema, std::string("malformed header for ") + to_string(kind) +
                                "; expected '" + std::string(header) + "'");
  }
  const std::size_t n_fields = text::split_csv(header).size();

  auto apply = [&](auto parsed) {
    mutate(id, [&](FacilityData& d) {
      if (parsed.rows.empty()) return false;
      for (const auto& rec : parsed.rows) {
        auto& table = table_of(d, &rec);
        table[key_of(rec)] = rec;
      }
      return true;
    });
    return parsed.report;
  };

  switch (kind) {
    case DatasetKind::meter: return apply(parse_table<MeterReading>(lines, id, n_fields));
    case DatasetKind::invoice: return apply(parse_table<InvoiceRecord>(lines, id, n_fields));
    case DatasetKind::swipe: return apply(parse_table<SwipeRecord>(lines, id, n_fields));
    case DatasetKind::weather: return apply(parse_table<WeatherRecord>(lines, id, n_fields));
    case DatasetKind::calendar: return apply(parse_table<CalendarRecord>(lines, id, n_fields));
  }
  return {};
}

std::vector<HourStamp> Store::find_gaps(std::string_view id, YearMonth month) const {
  auto v = view(id);
  const auto& meter = v.raw().meter;
  std::vector<HourStamp> gaps;
  for (HourStamp h : hourly_grid(month)) {
    auto it = meter.find(h);
    if (it == meter.end() || it->second.quality != Quality::observed) gaps.push_back(h);
  }
  return gaps;
}

std::size_t Store::prune_history(std::string_view id, Date as_of) {
  std::size_t removed = 0;
  mutate(id, [&](FacilityData& d) {
    const YearMonth back = YearMonth::of(as_of) - d.config.retention_months;
    const Date cutoff = Date::from_ymd(back.year(), back.month(),
                                       std::min<unsigned>(as_of.day(), static_cast<unsigned>(back.days())));
    auto erase_before = [&](auto& table, auto key_date) {
      for (auto it = table.begin(); it != table.end();) {
        if (key_date(it->first) < cutoff) {
          it = table.erase(it);
          ++removed;
        } else {
          ++it;
        }
      }
    };
    erase_before(d.meter, [](HourStamp h) { return h.date(); });
    erase_before(d.invoices, [](YearMonth m) { return m.last_day(); });
    erase_before(d.swipes, [](Date x) { return x; });
    erase_before(d.weather, [](Date x) { return x; });
    erase_before(d.calendar, [](Date x) { return x; });
    return removed > 0;
  });
  return removed;
}

void Store::write_imputed(std::string_view id, const std::vector<MeterReading>& readings) {
  mutate(id, [&](FacilityData& d) {
    bool changed = false;
    for (const auto& r : readings) {
      auto it = d.meter.find(r.timestamp);
      if (it != d.meter.end() && it->second.quality == Quality::observed) continue;
      MeterReading rec = r;
      rec.quality = Quality::imputed;
      d.meter[r.timestamp] = rec;
      changed = true;
    }
    return changed;
  });
}

void Store::persist(const FacilityData& data) const {
  if (dir_) write_facility(*dir_, data);
}

void Store::save_to(const fs::path& dir) const {
  fs::create_directories(dir / "facilities");
  write_file_atomic(dir / "FORMAT", "netzero-store " + std::to_string(kFormatVersion) + "\n");
  std::shared_lock lock(map_mutex_);
  for (const auto& [id, s] : slots_) write_facility(dir, *s->data);
}

void Store::load(const fs::path& dir) {
  const auto format = read_file(dir / "FORMAT");
  if (format != "netzero-store " + std::to_string(kFormatVersion) + "\n") {
    fail(ErrorKind::schema, "unsupported store format in " + dir.string());
  }
  const fs::path root = dir / "facilities";
  if (!fs::exists(root)) return;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) entries.push_back(e.path());
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    auto data = std::make_shared<FacilityData>(read_facility(p));
    auto s = std::make_shared<Slot>();
    s->data = std::move(data);
    slots_[s->data->config.id] = std::move(s);
  }
}

// ---------------------------------------------------------------------------
// On-disk layout

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::invalid_argument, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) fail(ErrorKind::invalid_argument, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::not_found, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

void write_facility(const fs::path& dir, const FacilityData& data) {
  const fs::path base = dir / "facilities" / data.config.id;
  const std::string id = text::csv_field(data.config.id);

  write_file_atomic(base / "config.json", to_json(data.config).dump(2) + "\n");

  std::string s = std::string(csv_header(DatasetKind::meter)) + ",quality\n";
  for (const auto& [k, r] : data.meter) {
    s += id + "," + r.timestamp.to_string() + "," +
         (r.quality == Quality::missing ? std::string() : text::format_double(r.kwh)) + "," +
         to_string(r.quality) + "\n";
  }
  write_file_atomic(base / "meter.csv", s);

  s = std::string(csv_header(DatasetKind::invoice)) + "\n";
  for (const auto& [k, r] : data.invoices) {
    s += id + "," + r.month.to_string() + "," + text::format_double(r.total_kwh) + "," +
         text::format_double(r.green_kwh_billed) + "," + text::format_minor(r.green_rate) + "," +
         text::format_minor(r.conventional_rate) + "\n";
  }
  write_file_atomic(base / "invoice.csv", s);

  s = std::string(csv_header(DatasetKind::swipe)) + "\n";
  for (const auto& [k, r] : data.swipes) {
    s += id + "," + r.date.to_string() + "," + std::to_string(r.employee_swipes) + "," +
         std::to_string(r.visitor_count) + "\n";
  }
  write_file_atomic(base / "swipe.csv", s);

  s = std::string(csv_header(DatasetKind::weather)) + "\n";
  for (const auto& [k, r] : data.weather) {
    s += id + "," + r.date.to_string() + "," + text::format_double(r.avg_temp) + "," +
         text::format_double(r.avg_precip) + "," + text::format_double(r.avg_humidity) + "," +
         text::format_double(r.avg_pressure) + "\n";
  }
  write_file_atomic(base / "weather.csv", s);

  s = std::string(csv_header(DatasetKind::calendar)) + "\n";
  for (const auto& [k, r] : data.calendar) {
    s += id + "," + r.date.to_string() + "," + bool_text(r.is_holiday) + "," +
         std::to_string(r.event_count) + "," + bool_text(r.lockdown_flag) + "\n";
  }
  write_file_atomic(base / "calendar.csv", s);
}

FacilityData read_facility(const fs::path& facility_dir) {
  FacilityData data;
  data.config = facility_config_from_json(nlohmann::json::parse(read_file(facility_dir / "config.json")));
  data.config.validate();

  auto load_table = [&](DatasetKind kind, auto* tag, std::size_t extra) {
    using Record = std::remove_pointer_t<decltype(tag)>;
    const fs::path file = facility_dir / (std::string(to_string(kind)) + ".csv");
    if (!fs::exists(file)) return;
    std::istringstream in(read_file(file));
    auto lines = read_lines(in);
    if (lines.empty() || !header_matches(lines.front(), csv_header(kind), extra)) {
      fail(ErrorKind::schema, "corrupt store file " + file.string());
    }
    const std::size_t n = text::split_csv(csv_header(kind)).size();
    auto& table = table_of(data, tag);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto fields = text::split_csv(lines[i]);
      if (fields.size() != n + extra) fail(ErrorKind::schema, "corrupt row in " + file.string());
      Record rec{};
      if (auto reason = parse_row(fields, rec); !reason.empty()) {
        fail(ErrorKind::schema, "corrupt row in " + file.string() + ": " + reason);
      }
      if constexpr (std::is_same_v<Record, MeterReading>) {
        if (fields[3] == "imputed") rec.quality = Quality::imputed;
        else if (fields[3] == "missing") rec.quality = Quality::missing;
      }
      table[key_of(rec)] = rec;
    }
  };
  load_table(DatasetKind::meter, static_cast<MeterReading*>(nullptr), 1);
  load_table(DatasetKind::invoice, static_cast<InvoiceRecord*>(nullptr), 0);
  load_table(DatasetKind::swipe, static_cast<SwipeRecord*>(nullptr), 0);
  load_table(DatasetKind::weather, static_cast<WeatherRecord*>(nullptr), 0);
  load_table(DatasetKind::calendar, static_cast<CalendarRecord*>(nullptr), 0);
  return data;
}

}  // namespace netzero
