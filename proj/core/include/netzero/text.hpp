#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netzero::text {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Integer minor units rendered as a decimal with two fraction digits.
std::string format_minor(std::int64_t minor);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<bool> parse_bool(std::string_view s);

/// Decimal currency amount to minor units (1/100). Empty if the value has
/// precision finer than one minor unit or is not a number.
std::optional<std::int64_t> parse_minor(std::string_view s);

std::string_view trim(std::string_view s);

/// Splits one CSV record. Double-quoted fields may contain commas and `""`.
std::vector<std::string> split_csv(std::string_view line);
std::string csv_field(std::string_view value);

}  // namespace netzero::text
