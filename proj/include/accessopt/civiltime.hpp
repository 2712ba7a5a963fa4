#pragma once

#include <compare>
#include <optional>
#include <string>

namespace accessopt::civiltime {

// Clock time without a date. Seconds may be fractional-free ints only.
struct CivilTime {
  int hour = 0;
  int minute = 0;
  int second = 0;

  int seconds_of_day() const { return hour * 3600 + minute * 60 + second; }
  auto operator<=>(const CivilTime&) const = default;
};

// Local civil datetime; the datasets are single-timezone so no offset is kept.
struct CivilDateTime {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  int second = 0;

  CivilTime time() const { return {hour, minute, second}; }
  auto operator<=>(const CivilDateTime&) const = default;
};

bool is_valid_date(int year, int month, int day);

// "HH:MM" or "HH:MM:SS".
std::optional<CivilTime> parse_time(const std::string& text);
// "YYYY-MM-DD HH:MM:SS".
std::optional<CivilDateTime> parse_datetime(const std::string& text);
// "YYYY-MM-DD".
std::optional<CivilDateTime> parse_date(const std::string& text);

std::string format_time(const CivilTime& t);
std::string format_datetime(const CivilDateTime& t);

// Calendar day increment.
CivilDateTime next_day(const CivilDateTime& t);

}  // namespace accessopt::civiltime
