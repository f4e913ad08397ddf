#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace retrofit {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws std::invalid_argument.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

inline int days_between(const Date& from, const Date& to) {
  return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

unsigned days_in_month(int year, unsigned month);

/// A calendar month. Ordered chronologically.
struct MonthKey {
  int year = 0;
  unsigned month = 1;  // 1..12

  static MonthKey of(const Date& date) {
    return {static_cast<int>(date.year()), static_cast<unsigned>(date.month())};
  }
  static MonthKey from_index(int index) {
    const int year = index >= 0 ? index / 12 : (index - 11) / 12;
    return {year, static_cast<unsigned>(index - year * 12 + 1)};
  }

  int index() const { return year * 12 + static_cast<int>(month) - 1; }
  unsigned days() const { return days_in_month(year, month); }

  friend auto operator<=>(const MonthKey&, const MonthKey&) = default;
  friend bool operator==(const MonthKey&, const MonthKey&) = default;
};

}  // namespace retrofit
