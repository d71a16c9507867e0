#include <doctest.h>

#include <cmath>
#include <sstream>

#include "co2fuse/fusion.hpp"
#include "co2fuse/synth.hpp"
#include "support.hpp"

using namespace co2fuse;
using namespace co2fuse::synth;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.n_stations = 4;
  cfg.n_transects = 20;
  cfg.soundings_per_transect = 30;
  cfg.days = 60;
  return cfg;
}

}  // namespace

TEST_CASE("field reduces to the base when every term is off") {
  SynthConfig cfg;
  cfg.seasonal_amplitude_ppm = 0;
  cfg.harmonic_amplitude_ppm = 0;
  cfg.trend_ppm_per_year = 0;
  cfg.coupling_u10 = cfg.coupling_v10 = cfg.coupling_pressure = cfg.coupling_t2m =
      cfg.coupling_tcwv = 0;
  for (int d = 0; d < 30; ++d) {
    CHECK(true_field(cfg, {46.0 + d * 0.2, 1.0 + d * 0.3}, Timestamp{cfg.start.seconds + d * 7919}) ==
          415.0);
  }
}

TEST_CASE("field is deterministic and trends by one year") {
  SynthConfig cfg;
  const geo::GeoPoint p{50, 7};
  const Timestamp t = make_utc(2020, 1, 1);
  CHECK(true_field(cfg, p, t) == true_field(cfg, p, t));
  cfg.coupling_u10 = cfg.coupling_v10 = cfg.coupling_pressure = cfg.coupling_t2m =
      cfg.coupling_tcwv = 0;
  const double diff = true_field(cfg, p, make_utc(2021, 1, 1)) - true_field(cfg, p, t);
  CHECK(diff == doctest::Approx(cfg.trend_ppm_per_year).epsilon(1e-9));
}

TEST_CASE("weather values are physically plausible") {
  SynthConfig cfg;
  for (int d = 0; d < 366; d += 5) {
    const auto w = weather_at(cfg, {50, 7}, Timestamp{cfg.start.seconds + d * kSecondsPerDay + 43200});
    CHECK(w.total_cloud_cover >= 0.0);
    CHECK(w.total_cloud_cover <= 1.0);
    CHECK(w.t2m > 240.0);
    CHECK(w.t2m < 320.0);
    CHECK(w.surface_pressure > 9e4);
    CHECK(w.tcwv >= 0.0);
  }
}

TEST_CASE("campaign geometry and determinism") {
  const auto cfg = small_config();
  const auto a = generate_campaign(cfg);
  CHECK(a.stations.size() == 4);
  CHECK(a.soundings.size() == 600);
  for (const auto& s : a.soundings) CHECK(cfg.bbox.contains(s.location));
  for (const auto& s : a.stations) CHECK(cfg.bbox.contains(s.location));

  const auto b = generate_campaign(cfg);
  CHECK(a.soundings == b.soundings);
  CHECK(a.series == b.series);
  CHECK(a.weather == b.weather);

  testing::TempDir d1("synth1"), d2("synth2");
  write_campaign(d1.path(), a);
  write_campaign(d2.path(), b);
  for (const char* f : {kSoundingsFile, kStationsFile, kSeriesFile, kWeatherFile}) {
    CHECK(testing::slurp(d1 / f) == testing::slurp(d2 / f));
  }
}

TEST_CASE("every generated file reads back with zero malformed rows") {
  const auto c = generate_campaign(small_config());
  testing::TempDir dir("synth-read");
  write_campaign(dir.path(), c);
  const auto s = ingest::read_soundings(dir / kSoundingsFile, {false, {}, {}});
  CHECK(s.report.malformed == 0);
  CHECK(s.records == c.soundings);
  CHECK(ingest::read_station_catalog(dir / kStationsFile) == c.stations);
  const auto series = ingest::read_station_series(dir / kSeriesFile);
  CHECK(series.report.malformed == 0);
  CHECK(series.records.size() == c.series.size());
  const auto w = ingest::read_weather(dir / kWeatherFile);
  CHECK(w.report.malformed == 0);
  CHECK(w.report.filtered == 0);
  CHECK(w.archive.size() == c.weather.size());
}

TEST_CASE("noise-free campaign labels equal the true field") {
  auto cfg = small_config();
  cfg.noise_std = 0;
  cfg.transect_offset_std = 0;
  const auto c = generate_campaign(cfg);
  const fusion::StationIndex idx(c.stations, c.series);
  const auto built =
      fusion::build_dataset(c.soundings, idx, ingest::WeatherArchive(c.weather), fusion::MatchConfig{});
  REQUIRE(!built.samples.empty());
  for (const auto& s : built.samples) {
    const auto* e = idx.find(s.station_id);
    REQUIRE(e);
    const auto m = fusion::match_sounding(
        ingest::SoundingRecord{s.sounding_time,
                               {s.features[fusion::kLatitude], s.features[fusion::kLongitude]},
                               s.features[fusion::kXco2], 0, 0},
        idx, fusion::MatchConfig{});
    REQUIRE(m);
    CHECK(s.label == true_field(cfg, e->station.location, m->observation.time));
  }
}

TEST_CASE("yearly station mean is the base plus half a year of trend") {
  SynthConfig cfg;
  cfg.n_stations = 3;
  cfg.n_transects = 0;
  cfg.harmonic_amplitude_ppm = 0;
  cfg.days = 365;
  cfg.start = make_utc(2021, 1, 1);
  const auto c = generate_campaign(cfg);
  double sum = 0;
  for (const auto& o : c.series) sum += o.co2;
  const double mean = sum / c.series.size();
  // daily weather anomalies dominate the spread; 365 independent days per station
  const double coupling_sd =
      std::sqrt(std::pow(cfg.coupling_u10 * 3, 2) + std::pow(cfg.coupling_v10 * 3, 2) +
                std::pow(cfg.coupling_pressure * 800, 2) + std::pow(cfg.coupling_t2m * 3, 2) +
                std::pow(cfg.coupling_tcwv * 4, 2));
  const double se = std::sqrt(coupling_sd * coupling_sd / 365 + 1.0 / c.series.size());
  CHECK(std::abs(mean - (cfg.base_ppm + 0.5 * cfg.trend_ppm_per_year)) < 3 * se);
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.noise_std = -1;
  CHECK_THROWS_KIND(generate_campaign(cfg), ErrorKind::InvalidArgument);
  cfg = SynthConfig{};
  cfg.n_stations = 0;
  CHECK_THROWS_KIND(generate_campaign(cfg), ErrorKind::InvalidArgument);
}
