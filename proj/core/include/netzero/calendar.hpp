#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace netzero {

/// A civil calendar date, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t serial) : serial_(serial) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  /// Parses `YYYY-MM-DD`. Throws Error(schema) on anything else.
  static Date parse(std::string_view iso);

  std::int32_t serial() const { return serial_; }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  /// 0 = Monday ... 6 = Sunday.
  int weekday() const;

  std::string to_string() const;

  Date operator+(int days) const { return Date(serial_ + days); }
  Date operator-(int days) const { return Date(serial_ - days); }
  int operator-(Date other) const { return serial_ - other.serial_; }
  Date& operator++() {
    ++serial_;
    return *this;
  }

  auto operator<=>(const Date&) const = default;

 private:
  std::int32_t serial_ = 0;
};

class YearMonth {
 public:
  constexpr YearMonth() = default;
  YearMonth(int year, unsigned month);

  /// Parses `YYYY-MM`.
  static YearMonth parse(std::string_view text);
  static YearMonth of(Date d) { return YearMonth(d.year(), d.month()); }

  int year() const { return year_; }
  unsigned month() const { return month_; }

  Date first_day() const;
  Date last_day() const;
  int days() const;

  YearMonth operator+(int months) const;
  YearMonth operator-(int months) const { return *this + (-months); }
  /// Number of months from `other` to this.
  int operator-(YearMonth other) const;

  bool contains(Date d) const { return YearMonth::of(d) == *this; }

  std::string to_string() const;

  auto operator<=>(const YearMonth&) const = default;

 private:
  int year_ = 1970;
  unsigned month_ = 1;
};

/// An hourly slot in facility-local civil time (no DST shifts).
class HourStamp {
 public:
  constexpr HourStamp() = default;
  constexpr explicit HourStamp(std::int64_t hours) : hours_(hours) {}
  HourStamp(Date d, int hour) : hours_(std::int64_t{d.serial()} * 24 + hour) {}

  /// Accepts `YYYY-MM-DDTHH:MM[:SS]` (or a space instead of `T`); minutes
  /// and seconds must be zero.
  static HourStamp parse(std::string_view iso);

  std::int64_t hours() const { return hours_; }
  Date date() const;
  int hour() const;

  /// `YYYY-MM-DDTHH:00:00`
  std::string to_string() const;

  HourStamp operator+(std::int64_t h) const { return HourStamp(hours_ + h); }

  auto operator<=>(const HourStamp&) const = default;

 private:
  std::int64_t hours_ = 0;
};

/// Inclusive date interval.
struct DateRange {
  Date first;
  Date last;

  static DateRange of(YearMonth m) { return {m.first_day(), m.last_day()}; }

  int days() const { return last - first + 1; }
  bool contains(Date d) const { return first <= d && d <= last; }
  std::vector<Date> dates() const;

  bool operator==(const DateRange&) const = default;
};

/// All hourly slots of a month, ascending.
std::vector<HourStamp> hourly_grid(YearMonth month);

}  // namespace netzero
