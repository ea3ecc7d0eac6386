#include "qrprox/time_window.hpp"

#include <cstdio>

#include "qrprox/error.hpp"

namespace qrprox {

using namespace std::chrono;

TimeInterval interval_from_code(int code) {
  if (code < 0 || code > 3) {
    throw Error(ErrorCode::InvalidInterval,
                "interval code must be 0..3, got " + std::to_string(code));
  }
  return static_cast<TimeInterval>(code);
}

namespace {

sys_days iso_week_start(sys_days day) {
  // Monday-start: shift back by the ISO weekday index (Mon=1..Sun=7).
  unsigned iso = weekday{day}.iso_encoding();
  return day - days{iso - 1};
}

}  // namespace

bool same_window(sys_seconds a, sys_seconds b, TimeInterval interval) {
  switch (interval) {
    case TimeInterval::AllTime:
      return true;
    case TimeInterval::Day:
      return floor<days>(a) == floor<days>(b);
    case TimeInterval::Week:
      return iso_week_start(floor<days>(a)) == iso_week_start(floor<days>(b));
    case TimeInterval::Month: {
      year_month_day ya{floor<days>(a)};
      year_month_day yb{floor<days>(b)};
      return ya.year() == yb.year() && ya.month() == yb.month();
    }
  }
  return false;
}

std::string format_rfc3339(sys_seconds tp) {
  sys_days day = floor<days>(tp);
  year_month_day ymd{day};
  hh_mm_ss<seconds> tod{tp - day};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()),
                static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

sys_seconds parse_rfc3339(std::string_view text) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char z = 0;
  std::string owned(text);
  if (std::sscanf(owned.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 ||
      z != 'Z' || owned.size() != 20) {
    throw Error(ErrorCode::InvalidArgument,
                "timestamp is not YYYY-MM-DDTHH:MM:SSZ: " + owned);
  }
  year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorCode::InvalidArgument, "timestamp has out-of-range fields: " + owned);
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace qrprox
