#include "netzero/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "netzero/error.hpp"

namespace netzero {

namespace chr = std::chrono;

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::schema: return "schema";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::convergence: return "convergence";
  }
  return "unknown";
}

namespace {

template <typename T>
bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, T& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && ptr == s.data() + pos + len;
}

chr::year_month_day to_ymd(std::int32_t serial) {
  return chr::year_month_day{chr::sys_days{chr::days{serial}}};
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) {
    fail(ErrorKind::schema, "invalid date " + std::to_string(year) + "-" +
                                std::to_string(month) + "-" + std::to_string(day));
  }
  return Date(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

Date Date::parse(std::string_view iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' || !parse_fixed(iso, 0, 4, y) ||
      !parse_fixed(iso, 5, 2, m) || !parse_fixed(iso, 8, 2, d)) {
    fail(ErrorKind::schema, "malformed date '" + std::string(iso) + "'");
  }
  return from_ymd(y, m, d);
}

int Date::year() const { return static_cast<int>(to_ymd(serial_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(serial_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(serial_).day()); }

int Date::weekday() const {
  // iso_encoding: Monday = 1 ... Sunday = 7
  return static_cast<int>(chr::weekday{chr::sys_days{chr::days{serial_}}}.iso_encoding()) - 1;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

YearMonth::YearMonth(int year, unsigned month) : year_(year), month_(month) {
  if (month < 1 || month > 12) {
    fail(ErrorKind::schema, "invalid month " + std::to_string(month));
  }
}

YearMonth YearMonth::parse(std::string_view text) {
  int y = 0;
  unsigned m = 0;
  if (text.size() != 7 || text[4] != '-' || !parse_fixed(text, 0, 4, y) ||
      !parse_fixed(text, 5, 2, m)) {
    fail(ErrorKind::schema, "malformed year-month '" + std::string(text) + "'");
  }
  return YearMonth(y, m);
}

Date YearMonth::first_day() const { return Date::from_ymd(year_, month_, 1); }

Date YearMonth::last_day() const {
  chr::year_month_day_last last{chr::year{year_}, chr::month_day_last{chr::month{month_}}};
  return Date(static_cast<std::int32_t>(chr::sys_days{last}.time_since_epoch().count()));
}

int YearMonth::days() const { return last_day() - first_day() + 1; }

YearMonth YearMonth::operator+(int months) const {
  int index = year_ * 12 + static_cast<int>(month_) - 1 + months;
  int y = index >= 0 ? index / 12 : (index - 11) / 12;
  return YearMonth(y, static_cast<unsigned>(index - y * 12 + 1));
}

int YearMonth::operator-(YearMonth other) const {
  return (year_ - other.year_) * 12 + static_cast<int>(month_) - static_cast<int>(other.month_);
}

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", year_, month_);
  return buf;
}

HourStamp HourStamp::parse(std::string_view iso) {
  if (iso.size() < 16 || (iso[10] != 'T' && iso[10] != ' ') || iso[13] != ':') {
    fail(ErrorKind::schema, "malformed timestamp '" + std::string(iso) + "'");
  }
  Date d = Date::parse(iso.substr(0, 10));
  int hour = 0, minute = 0, second = 0;
  bool ok = parse_fixed(iso, 11, 2, hour) && parse_fixed(iso, 14, 2, minute);
  if (ok && iso.size() > 16) {
    ok = iso.size() == 19 && iso[16] == ':' && parse_fixed(iso, 17, 2, second);
  }
  if (!ok || hour > 23 || minute > 59 || second > 59) {
    fail(ErrorKind::schema, "malformed timestamp '" + std::string(iso) + "'");
  }
  if (minute != 0 || second != 0) {
    fail(ErrorKind::schema, "timestamp not on the hour '" + std::string(iso) + "'");
  }
  return HourStamp(d, hour);
}

Date HourStamp::date() const {
  std::int64_t day = hours_ >= 0 ? hours_ / 24 : (hours_ - 23) / 24;
  return Date(static_cast<std::int32_t>(day));
}

int HourStamp::hour() const { return static_cast<int>(hours_ - std::int64_t{date().serial()} * 24); }

std::string HourStamp::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:00:00", hour());
  return date().to_string() + buf;
}

std::vector<Date> DateRange::dates() const {
  std::vector<Date> out;
  if (last < first) return out;
  out.reserve(static_cast<std::size_t>(days()));
  for (Date d = first; d <= last; ++d) out.push_back(d);
  return out;
}

std::vector<HourStamp> hourly_grid(YearMonth month) {
  std::vector<HourStamp> out;
  HourStamp start(month.first_day(), 0);
  const auto n = static_cast<std::int64_t>(month.days()) * 24;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t h = 0; h < n; ++h) out.push_back(start + h);
  return out;
}

}  // namespace netzero
