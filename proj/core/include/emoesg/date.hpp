#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace emoesg {

using Date = std::chrono::year_month_day;

/// Strict `YYYY-MM-DD`; nullopt on any other shape or an invalid calendar day.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(const Date& d);

inline int year_of(const Date& d) { return static_cast<int>(d.year()); }

/// Whole days from `a` to `b` (positive when b is later).
inline long days_between(const Date& a, const Date& b) {
  return (std::chrono::sys_days(b) - std::chrono::sys_days(a)).count();
}

}  // namespace emoesg
