#include <doctest.h>

#include <cmath>
#include <sstream>

#include "co2fuse/fusion.hpp"
#include "support.hpp"

using namespace co2fuse;
using namespace co2fuse::fusion;
using ingest::SoundingRecord;
using ingest::Station;
using ingest::StationObservation;
using ingest::WeatherSample;

namespace {

const Timestamp kNoon = make_utc(2020, 6, 1, 12);

SoundingRecord sounding(double lat, double lon, Timestamp t = kNoon, double xco2 = 410.0) {
  return SoundingRecord{t, {lat, lon}, xco2, 0.5, 0};
}

WeatherSample weather(double lat, double lon, Timestamp t, double t2m = 290.0) {
  WeatherSample w;
  w.time = t;
  w.location = {lat, lon};
  w.u10 = 1;
  w.v10 = 2;
  w.surface_pressure = 101000;
  w.t2m = t2m;
  w.skin_temperature = t2m + 1;
  w.vint_temperature = 2.4e6;
  w.tcwv = 10;
  w.cloud_base_height = 800;
  w.total_cloud_cover = 0.25;
  return w;
}

// Integer-degree weather nodes around (0..2, 0..2) at 09/12/15 UTC.
ingest::WeatherArchive small_archive() {
  std::vector<WeatherSample> w;
  for (int lat = -1; lat <= 2; ++lat) {
    for (int lon = -1; lon <= 2; ++lon) {
      for (int h : {9, 12, 15}) w.push_back(weather(lat, lon, make_utc(2020, 6, 1, h)));
    }
  }
  return ingest::WeatherArchive(std::move(w));
}

}  // namespace

TEST_CASE("feature list is the frozen 14-name order") {
  CHECK(kFeatureNames.size() == 14);
  CHECK(kFeatureNames[kXco2] == "xco2");
  CHECK(kFeatureNames[kTimeEpochYears] == "time_epoch_years");
  CHECK(kFeatureNames[kTotalCloudCover] == "total_cloud_cover");
  CHECK(feature_fingerprint().rfind("xco2,xco2_uncertainty,latitude,longitude,", 0) == 0);
}

TEST_CASE("match_sounding: radius, nearest station, nearest observation") {
  const std::vector<Station> one = {{"A", {0, 0}, std::nullopt}};
  const std::vector<StationObservation> obs = {
      {"A", Timestamp{kNoon.seconds - 600}, 420.0}, {"A", Timestamp{kNoon.seconds + 3600}, 421.0}};
  const StationIndex idx(one, obs);

  const auto m = match_sounding(sounding(0, 0.10), idx, {});
  REQUIRE(m);
  CHECK(m->station_id == "A");
  CHECK(m->observation.co2 == 420.0);
  CHECK(std::abs(m->distance_km - 11.1195) < 1e-3);

  // 0.27 degrees of longitude at the equator is about 30 km
  CHECK_FALSE(match_sounding(sounding(0, 0.27), idx, {}));

  const std::vector<Station> two = {{"FAR", {0, 8.0 / 111.195}, std::nullopt},
                                    {"NEAR", {0, 5.0 / 111.195}, std::nullopt}};
  const std::vector<StationObservation> both = {{"FAR", kNoon, 1.0}, {"NEAR", kNoon, 2.0}};
  const auto m2 = match_sounding(sounding(0, 0), StationIndex(two, both), {});
  REQUIRE(m2);
  CHECK(m2->station_id == "NEAR");
}

TEST_CASE("match_sounding: ties and time window") {
  const std::vector<Station> cat = {{"B", {0, 0.1}, std::nullopt}, {"A", {0, -0.1}, std::nullopt}};
  const std::vector<StationObservation> obs = {{"A", Timestamp{kNoon.seconds - 1800}, 1.0},
                                               {"A", Timestamp{kNoon.seconds + 1800}, 2.0},
                                               {"B", kNoon, 3.0}};
  const auto m = match_sounding(sounding(0, 0), StationIndex(cat, obs), {});
  REQUIRE(m);
  CHECK(m->station_id == "A");          // equal distance, smaller id
  CHECK(m->observation.co2 == 1.0);     // equal |dt|, earlier observation

  // nearest station has no observation in the window, so the farther one wins
  const std::vector<StationObservation> late = {{"A", Timestamp{kNoon.seconds + 7200}, 1.0},
                                                {"B", kNoon, 3.0}};
  const auto m2 = match_sounding(sounding(0, -0.01), StationIndex(cat, late), {});
  REQUIRE(m2);
  CHECK(m2->station_id == "B");

  CHECK_THROWS_KIND(match_sounding(sounding(0, 0), StationIndex({}, {}), {}),
                    ErrorKind::InvalidArgument);
}

TEST_CASE("nearest_weather") {
  std::vector<WeatherSample> w;
  for (int lat = 54; lat <= 56; ++lat) {
    for (int lon = 13; lon <= 15; ++lon) w.push_back(weather(lat, lon, kNoon));
  }
  const ingest::WeatherArchive arch(w);
  const auto& got = nearest_weather(sounding(55.4, 13.6), arch);
  CHECK(got.location == geo::GeoPoint{55, 14});

  // brute-force oracle over the four surrounding nodes
  double best = 1e9;
  geo::GeoPoint best_p;
  for (geo::GeoPoint p : {geo::GeoPoint{55, 13}, geo::GeoPoint{55, 14}, geo::GeoPoint{56, 13},
                          geo::GeoPoint{56, 14}}) {
    const double d = geo::geodesic_km({55.4, 13.6}, p);
    if (d < best) best = d, best_p = p;
  }
  CHECK(best_p == got.location);

  const ingest::WeatherArchive two_times({weather(1, 1, Timestamp{kNoon.seconds - 3600}, 280),
                                          weather(1, 1, Timestamp{kNoon.seconds + 3600}, 300)});
  CHECK(nearest_weather(sounding(1, 1), two_times).t2m == 280);

  const ingest::WeatherArchive far({weather(40, 40, kNoon)});
  CHECK_THROWS_KIND(nearest_weather(sounding(0, 0), far), ErrorKind::StaleWeather);
  const ingest::WeatherArchive old({weather(0, 0, Timestamp{kNoon.seconds - 7 * 3600})});
  CHECK_THROWS_KIND(nearest_weather(sounding(0, 0), old), ErrorKind::StaleWeather);
  CHECK_THROWS_KIND(nearest_weather(sounding(0, 0), ingest::WeatherArchive{}), ErrorKind::NoData);
}

TEST_CASE("build_dataset: hand-enumerated matches") {
  const std::vector<Station> cat = {{"A", {0.5, 0.5}, std::nullopt}, {"B", {1.5, 1.5}, std::nullopt}};
  std::vector<StationObservation> obs;
  for (int h = 9; h <= 15; ++h) {
    obs.push_back({"A", make_utc(2020, 6, 1, h), 420.0 + h});
    obs.push_back({"B", make_utc(2020, 6, 1, h), 430.0 + h});
  }
  std::vector<SoundingRecord> s = {
      sounding(0.5, 0.55, make_utc(2020, 6, 1, 12, 10)),  // A, obs 12:00
      sounding(1.5, 1.45, make_utc(2020, 6, 1, 11, 50)),  // B, obs 12:00
      sounding(0.6, 0.5, make_utc(2020, 6, 1, 13, 40)),   // A, obs 14:00
      sounding(1.4, 1.5, make_utc(2020, 6, 1, 9, 0)),     // B, obs 09:00
      sounding(1.0, 1.0),                                 // ~78 km from both
      sounding(-0.5, -0.5),
      sounding(0.5, 0.5, make_utc(2020, 6, 1, 20)),       // no observation within an hour
      sounding(1.5, 1.5, make_utc(2020, 6, 2, 12)),
      sounding(5, 5),
      sounding(2.0, 2.0),
  };
  const auto built = build_dataset(s, StationIndex(cat, obs), small_archive(), {});
  REQUIRE(built.samples.size() == 4);
  CHECK(built.report.soundings == 10);
  CHECK(built.report.matched == 4);
  CHECK(built.report.no_station == 6);
  CHECK(built.report.match_rate() == doctest::Approx(0.4));
  CHECK(built.samples[0].label == 439.0);  // B at 09:00 sorts first
  CHECK(built.samples[1].station_id == "B");
  CHECK(built.samples[2].label == 432.0);
  CHECK(built.samples[3].label == 434.0);
  for (const auto& x : built.samples) {
    CHECK(x.station_distance_km <= 25.0);
    CHECK(x.features[kT2m] == 290.0);
  }

  // rerun is identical
  CHECK(build_dataset(s, StationIndex(cat, obs), small_archive(), {}).samples == built.samples);

  // duplicate soundings are kept
  std::vector<SoundingRecord> dup = {s[0], s[0]};
  CHECK(build_dataset(dup, StationIndex(cat, obs), small_archive(), {}).samples.size() == 2);
}

TEST_CASE("build_dataset: seasonal mismatch is an empty dataset") {
  const std::vector<Station> cat = {{"A", {0.5, 0.5}, std::nullopt}};
  const std::vector<StationObservation> summer = {{"A", make_utc(2020, 7, 1, 12), 410.0}};
  const std::vector<SoundingRecord> winter = {sounding(0.5, 0.5, make_utc(2020, 1, 10, 12))};
  CHECK_THROWS_KIND(build_dataset(winter, StationIndex(cat, summer), small_archive(), {}),
                    ErrorKind::EmptyDataset);
}

TEST_CASE("make_features uses the canonical order") {
  const auto s = sounding(1.25, 2.5, make_utc(2020, 6, 1, 12), 412.0);
  const auto w = weather(1, 3, s.time, 288.0);
  const auto f = make_features(s, w);
  CHECK(f[kXco2] == 412.0);
  CHECK(f[kXco2Uncertainty] == 0.5);
  CHECK(f[kLatitude] == 1.25);
  CHECK(f[kLongitude] == 2.5);
  CHECK(f[kTimeEpochYears] == epoch_years(s.time));
  CHECK(f[kU10] == 1);
  CHECK(f[kV10] == 2);
  CHECK(f[kSurfacePressure] == 101000);
  CHECK(f[kT2m] == 288);
  CHECK(f[kSkinTemperature] == 289);
  CHECK(f[kVintTemperature] == 2.4e6);
  CHECK(f[kTcwv] == 10);
  CHECK(f[kCloudBaseHeight] == 800);
  CHECK(f[kTotalCloudCover] == 0.25);
}

namespace {

std::vector<LabeledSample> five_stations() {
  std::vector<LabeledSample> d;
  for (int i = 0; i < 50; ++i) {
    LabeledSample s;
    for (std::size_t j = 0; j < kFeatureCount; ++j) s.features[j] = i * (j + 1) + (i % 7) * 0.3;
    s.label = 400 + i;
    s.station_id = std::string(1, static_cast<char>('A' + i % 5));
    s.sounding_time = Timestamp{i * 60};
    d.push_back(s);
  }
  return d;
}

}  // namespace

TEST_CASE("split_by_station") {
  const auto d = five_stations();
  const auto split = split_by_station(d, {"C"});
  CHECK(split.test.size() == 10);
  CHECK(split.train.size() == 40);
  for (const auto& s : split.test) CHECK(s.station_id == "C");
  for (const auto& s : split.train) CHECK(s.station_id != "C");

  const auto all = split_by_station(d, {"A", "B", "C", "D", "E"});
  CHECK(all.train.empty());
  CHECK_THROWS_KIND(split_by_station(d, {"XYZ"}), ErrorKind::InvalidArgument);
}

TEST_CASE("norm stats: population std and standardization") {
  std::vector<FeatureVector> rows(2);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    rows[0][j] = 1.0 + j;
    rows[1][j] = 3.0 + j;
  }
  const auto stats = fit_norm_stats(rows);
  CHECK(stats.mean[0] == 2.0);
  CHECK(stats.std[0] == 1.0);
  CHECK(standardize(rows[0], stats)[0] == -1.0);
  CHECK(standardize(rows[1], stats)[0] == 1.0);
  for (double z : standardize(stats.mean, stats)) CHECK(z == 0.0);

  CHECK_THROWS_KIND(fit_norm_stats(std::span<const FeatureVector>(rows.data(), 1)),
                    ErrorKind::DegenerateFeature);
  rows[1][kTcwv] = rows[0][kTcwv];
  try {
    fit_norm_stats(rows);
    FAIL("expected degenerate feature");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateFeature);
    CHECK(std::string(e.what()).find("tcwv") != std::string::npos);
  }
}

TEST_CASE("standardized training features have zero mean and unit std") {
  const auto d = five_stations();
  const auto stats = fit_norm_stats(d);
  FeatureVector sum{}, sq{};
  for (const auto& s : d) {
    const auto z = standardize(s.features, stats);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      sum[j] += z[j];
      sq[j] += z[j] * z[j];
    }
  }
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const double mean = sum[j] / d.size();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(sq[j] / d.size() - mean * mean) - 1.0) < 1e-9);
  }
}

TEST_CASE("dataset cache round trip") {
  auto d = five_stations();
  d[0].station_distance_km = 12.345678901234567;
  std::stringstream buf;
  write_dataset(buf, d);
  CHECK(read_dataset(buf) == d);

  std::istringstream bad(buf.str().substr(0, buf.str().find('\n') + 1) + "1,2,3\n");
  CHECK_THROWS_KIND(read_dataset(bad), ErrorKind::Schema);
}
