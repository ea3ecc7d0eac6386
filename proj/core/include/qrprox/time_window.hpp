#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace qrprox {

/// The four interval codes of the COUNTER/FIRST built-ins:
/// 0 all time, 1 day, 2 week, 3 month.
enum class TimeInterval : int {
  AllTime = 0,
  Day = 1,
  Week = 2,
  Month = 3,
};

/// Throws InvalidInterval for anything outside 0..3.
TimeInterval interval_from_code(int code);

/// Calendar-window membership in UTC: same UTC date, same ISO-8601 week
/// (Monday start), same calendar month. AllTime is always true.
bool same_window(std::chrono::sys_seconds a, std::chrono::sys_seconds b, TimeInterval interval);

/// "2026-08-23T14:05:00Z"
std::string format_rfc3339(std::chrono::sys_seconds tp);

/// Accepts the Z-suffixed RFC 3339 form emitted by format_rfc3339.
/// Throws InvalidArgument on anything else.
std::chrono::sys_seconds parse_rfc3339(std::string_view text);

}  // namespace qrprox
