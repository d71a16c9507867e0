#include "co2fuse/time.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

namespace co2fuse {

namespace {

std::optional<int> read_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) return std::nullopt;
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const sys_days d{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
  return d.time_since_epoch().count();
}

}  // namespace

Timestamp make_utc(int year, unsigned month, unsigned day, int hour, int minute, int second) {
  return Timestamp{days_from_civil(year, month, day) * kSecondsPerDay + hour * kSecondsPerHour +
                   minute * 60 + second};
}

std::optional<Timestamp> parse_rfc3339(std::string_view text) {
  // 2015-06-01T12:00:00Z
  if (text.size() < 20) return std::nullopt;
  const auto year = read_digits(text, 0, 4);
  const auto month = read_digits(text, 5, 2);
  const auto day = read_digits(text, 8, 2);
  const auto hour = read_digits(text, 11, 2);
  const auto minute = read_digits(text, 14, 2);
  const auto second = read_digits(text, 17, 2);
  if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != 't') ||
      text[13] != ':' || text[16] != ':')
    return std::nullopt;

  const std::chrono::year_month_day ymd{std::chrono::year{*year},
                                        std::chrono::month{static_cast<unsigned>(*month)},
                                        std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok() || *hour > 23 || *minute > 59 || *second > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t digits_start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == digits_start) return std::nullopt;
  }
  if (pos >= text.size()) return std::nullopt;

  std::int64_t offset = 0;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    const auto oh = read_digits(text, pos + 1, 2);
    const auto om = read_digits(text, pos + 4, 2);
    if (!oh || !om || pos + 3 >= text.size() || text[pos + 3] != ':' || *oh > 23 || *om > 59)
      return std::nullopt;
    offset = sign * (*oh * kSecondsPerHour + *om * 60);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;

  const Timestamp local = make_utc(*year, static_cast<unsigned>(*month),
                                   static_cast<unsigned>(*day), *hour, *minute, *second);
  return Timestamp{local.seconds - offset};
}

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  std::int64_t days = t.seconds / kSecondsPerDay;
  std::int64_t rem = t.seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                static_cast<int>(rem % 60));
  return buf;
}

double epoch_years(Timestamp t) {
  using namespace std::chrono;
  std::int64_t days = t.seconds / kSecondsPerDay;
  if (t.seconds % kSecondsPerDay < 0) --days;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const int y = static_cast<int>(ymd.year());
  const std::int64_t start = make_utc(y, 1, 1).seconds;
  const std::int64_t end = make_utc(y + 1, 1, 1).seconds;
  return y + static_cast<double>(t.seconds - start) / static_cast<double>(end - start);
}

int minute_of_day(Timestamp t) {
  std::int64_t rem = t.seconds % kSecondsPerDay;
  if (rem < 0) rem += kSecondsPerDay;
  return static_cast<int>(rem / 60);
}

bool DailyWindow::contains(Timestamp t) const {
  std::int64_t rem = t.seconds % kSecondsPerDay;
  if (rem < 0) rem += kSecondsPerDay;
  const std::int64_t start_s = static_cast<std::int64_t>(start_minute) * 60;
  const std::int64_t end_s = static_cast<std::int64_t>(end_minute) * 60;
  if (start_minute <= end_minute) return rem >= start_s && rem <= end_s;
  return rem >= start_s || rem <= end_s;
}

std::optional<DailyWindow> parse_daily_window(std::string_view text) {
  if (text.size() != 11 || text[2] != ':' || text[5] != '-' || text[8] != ':') return std::nullopt;
  const auto h1 = read_digits(text, 0, 2);
  const auto m1 = read_digits(text, 3, 2);
  const auto h2 = read_digits(text, 6, 2);
  const auto m2 = read_digits(text, 9, 2);
  if (!h1 || !m1 || !h2 || !m2 || *h1 > 23 || *h2 > 23 || *m1 > 59 || *m2 > 59)
    return std::nullopt;
  return DailyWindow{*h1 * 60 + *m1, *h2 * 60 + *m2};
}

std::string format_daily_window(const DailyWindow& w) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02d:%02d-%02d:%02d", w.start_minute / 60, w.start_minute % 60,
                w.end_minute / 60, w.end_minute % 60);
  return buf;
}

}  // namespace co2fuse
