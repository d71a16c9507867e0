#include <doctest.h>

#include "co2fuse/time.hpp"

using namespace co2fuse;

TEST_CASE("rfc3339 parsing and formatting") {
  const auto t = parse_rfc3339("2020-03-01T12:34:56Z");
  REQUIRE(t);
  CHECK(*t == make_utc(2020, 3, 1, 12, 34, 56));
  CHECK(format_rfc3339(*t) == "2020-03-01T12:34:56Z");

  CHECK(parse_rfc3339("1970-01-01T00:00:00Z")->seconds == 0);
  CHECK(parse_rfc3339("2020-03-01T14:34:56+02:00") == t);
  CHECK(parse_rfc3339("2020-03-01T12:34:56.999Z") == t);
  CHECK(parse_rfc3339("1969-12-31T23:59:59Z")->seconds == -1);
}

TEST_CASE("rfc3339 rejects malformed text") {
  for (const char* bad : {"", "2020-03-01", "2020-13-01T00:00:00Z", "2020-02-30T00:00:00Z",
                          "2020-03-01T24:00:00Z", "2020-03-01 12:00:00Z", "2020-03-01T12:00:00",
                          "2020-03-01T12:00:00Zjunk", "NaN"}) {
    CHECK_MESSAGE(!parse_rfc3339(bad), bad);
  }
}

TEST_CASE("epoch years") {
  CHECK(epoch_years(make_utc(2015, 1, 1)) == 2015.0);
  CHECK(epoch_years(make_utc(2021, 7, 2, 12)) == doctest::Approx(2021.5).epsilon(1e-9));
  CHECK(epoch_years(make_utc(2020, 12, 31, 23, 59, 59)) < 2021.0);
}

TEST_CASE("daily window is inclusive and may wrap midnight") {
  const DailyWindow w;
  CHECK(w.contains(make_utc(2020, 1, 1, 9, 0)));
  CHECK(w.contains(make_utc(2020, 1, 1, 12, 0)));
  CHECK(w.contains(make_utc(2020, 1, 1, 15, 0)));
  CHECK_FALSE(w.contains(make_utc(2020, 1, 1, 15, 0, 1)));
  CHECK_FALSE(w.contains(make_utc(2020, 1, 1, 16, 0)));
  CHECK_FALSE(w.contains(make_utc(2020, 1, 1, 8, 59, 59)));

  const auto night = parse_daily_window("22:00-02:00");
  REQUIRE(night);
  CHECK(night->contains(make_utc(2020, 1, 1, 23, 0)));
  CHECK(night->contains(make_utc(2020, 1, 1, 1, 0)));
  CHECK_FALSE(night->contains(make_utc(2020, 1, 1, 12, 0)));

  CHECK(format_daily_window(*parse_daily_window("09:00-15:00")) == "09:00-15:00");
  CHECK_FALSE(parse_daily_window("9-15"));
  CHECK_FALSE(parse_daily_window("09:00-25:00"));
}
