#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace co2fuse {

/// UTC instant with one-second resolution, counted from the Unix epoch.
struct Timestamp {
  std::int64_t seconds = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)`. Fractional seconds are
/// truncated. Returns nullopt on any deviation from that grammar.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_rfc3339(Timestamp t);

Timestamp make_utc(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                   int second = 0);

/// Continuous calendar-year coordinate, e.g. 2015.37.
double epoch_years(Timestamp t);

int minute_of_day(Timestamp t);

/// Daily UTC window, inclusive on both ends. A window whose start is after its
/// end wraps midnight.
struct DailyWindow {
  int start_minute = 9 * 60;
  int end_minute = 15 * 60;

  bool contains(Timestamp t) const;
};

/// Parses `HH:MM-HH:MM`.
std::optional<DailyWindow> parse_daily_window(std::string_view text);
std::string format_daily_window(const DailyWindow& w);

}  // namespace co2fuse
