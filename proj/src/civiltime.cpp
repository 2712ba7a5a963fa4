#include "accessopt/civiltime.hpp"

#include <cstdio>

namespace accessopt::civiltime {

namespace {

int days_in_month(int year, int month) {
  static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

}  // namespace

bool is_valid_date(int year, int month, int day) {
  if (year < 1970 || year > 2100) return false;
  if (month < 1 || month > 12) return false;
  return day >= 1 && day <= days_in_month(year, month);
}

std::optional<CivilTime> parse_time(const std::string& text) {
  int h = 0, m = 0, s = 0;
  char extra = 0;
  int fields = std::sscanf(text.c_str(), "%d:%d:%d%c", &h, &m, &s, &extra);
  if (fields != 2 && fields != 3) return std::nullopt;
  if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59) return std::nullopt;
  return CivilTime{h, m, s};
}

std::optional<CivilDateTime> parse_datetime(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char extra = 0;
  int fields = std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &extra);
  if (fields != 6) return std::nullopt;
  if (!is_valid_date(y, mo, d)) return std::nullopt;
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) return std::nullopt;
  return CivilDateTime{y, mo, d, h, mi, s};
}

std::optional<CivilDateTime> parse_date(const std::string& text) {
  int y = 0, mo = 0, d = 0;
  char extra = 0;
  int fields = std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &mo, &d, &extra);
  if (fields != 3) return std::nullopt;
  if (!is_valid_date(y, mo, d)) return std::nullopt;
  return CivilDateTime{y, mo, d, 0, 0, 0};
}

std::string format_time(const CivilTime& t) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", t.hour, t.minute, t.second);
  return buf;
}

std::string format_datetime(const CivilDateTime& t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", t.year, t.month, t.day, t.hour,
                t.minute, t.second);
  return buf;
}

CivilDateTime next_day(const CivilDateTime& t) {
  CivilDateTime out = t;
  out.day += 1;
  if (out.day > days_in_month(out.year, out.month)) {
    out.day = 1;
    out.month += 1;
    if (out.month > 12) {
      out.month = 1;
      out.year += 1;
    }
  }
  return out;
}

}  // namespace accessopt::civiltime
