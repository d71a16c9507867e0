#include "co2fuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "co2fuse/error.hpp"

namespace co2fuse::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Standard normal from a hash of (seed, day, channel).
double hashed_gaussian(std::uint64_t seed, std::int64_t day, std::uint64_t channel) {
  const std::uint64_t h1 =
      splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(day) * 16 + channel));
  const std::uint64_t h2 = splitmix64(h1);
  const double u1 = (static_cast<double>(h1 >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * geo::kPi * u2);
}

std::int64_t day_of(Timestamp t) {
  std::int64_t d = t.seconds / kSecondsPerDay;
  if (t.seconds % kSecondsPerDay < 0) --d;
  return d;
}

double year_fraction(Timestamp t) {
  const double y = epoch_years(t);
  return y - std::floor(y);
}

struct Anomalies {
  double u10, v10, pressure, t2m, tcwv, cloud;
};

// Physical-unit anomalies of the day's weather regime.
Anomalies anomalies(const SynthConfig& cfg, Timestamp t) {
  const std::int64_t d = day_of(t);
  return Anomalies{3.0 * hashed_gaussian(cfg.seed, d, 0), 3.0 * hashed_gaussian(cfg.seed, d, 1),
                   800.0 * hashed_gaussian(cfg.seed, d, 2), 3.0 * hashed_gaussian(cfg.seed, d, 3),
                   4.0 * hashed_gaussian(cfg.seed, d, 4), hashed_gaussian(cfg.seed, d, 5)};
}

double spatial(const SynthConfig& cfg, const geo::GeoPoint& p) {
  const auto& b = cfg.bbox;
  const double y = (p.latitude - b.south) / (b.north - b.south);
  const double x = (p.longitude - b.west) / (b.east - b.west);
  return cfg.harmonic_amplitude_ppm *
         (std::sin(2.0 * geo::kPi * y) * std::cos(2.0 * geo::kPi * x) + 0.5 * std::cos(geo::kPi * y));
}

double seasonal(const SynthConfig& cfg, Timestamp t) {
  return std::sin(2.0 * geo::kPi * year_fraction(t) + cfg.seasonal_phase);
}

double trend(const SynthConfig& cfg, Timestamp t) {
  return cfg.trend_ppm_per_year * (epoch_years(t) - epoch_years(cfg.start));
}

}  // namespace

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (!(cfg.noise_std >= 0.0)) fail("noise_std must be >= 0");
  if (!(cfg.transect_offset_std >= 0.0)) fail("transect_offset_std must be >= 0");
  if (cfg.n_stations < 1) fail("n_stations must be >= 1");
  if (cfg.n_transects < 0 || cfg.soundings_per_transect < 0) fail("transect counts must be >= 0");
  if (cfg.days < 1) fail("days must be >= 1");
  if (!(cfg.transect_width_km > 0.0) || !(cfg.transect_half_length_deg > 0.0)) {
    fail("transect geometry must be positive");
  }
  if (!(cfg.flagged_fraction >= 0.0 && cfg.flagged_fraction <= 1.0)) {
    fail("flagged_fraction must be in [0, 1]");
  }
  if (!(cfg.station_gap_fraction >= 0.0 && cfg.station_gap_fraction < 1.0)) {
    fail("station_gap_fraction must be in [0, 1)");
  }
  geo::make_bbox(cfg.bbox.south, cfg.bbox.west, cfg.bbox.north, cfg.bbox.east);
}

ingest::WeatherSample weather_at(const SynthConfig& cfg, const geo::GeoPoint& location,
                                 Timestamp t) {
  const Anomalies a = anomalies(cfg, t);
  const double dlat = location.latitude - 50.0;
  const double season = std::sin(2.0 * geo::kPi * year_fraction(t) - geo::kPi / 2.0);
  const double hour = minute_of_day(t) / 60.0;

  ingest::WeatherSample w;
  w.time = t;
  w.location = location;
  w.u10 = 2.0 + 0.1 * dlat + a.u10;
  w.v10 = 0.5 - 0.05 * (location.longitude - 7.5) + a.v10;
  w.surface_pressure = 101325.0 - 60.0 * dlat + a.pressure;
  w.t2m = 283.0 - 0.6 * dlat + 9.0 * season + a.t2m + 2.0 * std::sin(geo::kPi * (hour - 9.0) / 12.0);
  w.skin_temperature = w.t2m + 1.5 + 0.5 * a.t2m / 3.0;
  w.vint_temperature = 2.45e6 + 2.0e4 * season + 2.0e3 * a.t2m;
  w.tcwv = std::max(1.0, 15.0 + 8.0 * season + a.tcwv);
  w.cloud_base_height = std::max(50.0, 1200.0 + 400.0 * a.cloud);
  w.total_cloud_cover = std::clamp(0.5 + 0.2 * a.cloud, 0.0, 1.0);
  return w;
}

double true_field(const SynthConfig& cfg, const geo::GeoPoint& location, Timestamp t) {
  const Anomalies a = anomalies(cfg, t);
  const double coupling = cfg.coupling_u10 * a.u10 + cfg.coupling_v10 * a.v10 +
                          cfg.coupling_pressure * a.pressure + cfg.coupling_t2m * a.t2m +
                          cfg.coupling_tcwv * a.tcwv;
  return cfg.base_ppm + trend(cfg, t) + cfg.seasonal_amplitude_ppm * seasonal(cfg, t) +
         spatial(cfg, location) + coupling;
}

double column_field(const SynthConfig& cfg, const geo::GeoPoint& location, Timestamp t) {
  return cfg.base_ppm + trend(cfg, t) +
         cfg.column_seasonal_fraction * cfg.seasonal_amplitude_ppm * seasonal(cfg, t) +
         spatial(cfg, location);
}

Campaign generate_campaign(const SynthConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto& box = cfg.bbox;
  Campaign c;

  // stations, kept a margin away from the edges so transects fit
  const double margin_lat = std::min(1.0, (box.north - box.south) / 4.0);
  const double margin_lon = std::min(1.0, (box.east - box.west) / 4.0);
  for (int i = 0; i < cfg.n_stations; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "S%02d", i + 1);
    const double lat = box.south + margin_lat + unit(rng) * (box.north - box.south - 2 * margin_lat);
    const double lon = box.west + margin_lon + unit(rng) * (box.east - box.west - 2 * margin_lon);
    const double elev = std::round(unit(rng) * 5000.0) / 10.0;
    c.stations.push_back(ingest::Station{id, geo::GeoPoint{lat, lon}, elev});
  }

  // hourly station series with isolated gaps and multi-day outages
  const std::int64_t hours = static_cast<std::int64_t>(cfg.days) * 24;
  for (const auto& st : c.stations) {
    std::vector<std::pair<std::int64_t, std::int64_t>> outages;
    for (int o = 0; o < cfg.station_outages; ++o) {
      const auto begin = static_cast<std::int64_t>(unit(rng) * static_cast<double>(hours));
      const auto len = static_cast<std::int64_t>(24 + unit(rng) * 96);
      outages.emplace_back(begin, begin + len);
    }
    for (std::int64_t h = 0; h < hours; ++h) {
      const double noise = gauss(rng) * cfg.noise_std;
      const bool gap = unit(rng) < cfg.station_gap_fraction;
      const bool out = std::any_of(outages.begin(), outages.end(),
                                   [h](const auto& r) { return h >= r.first && h < r.second; });
      if (gap || out) continue;
      const Timestamp t{cfg.start.seconds + h * kSecondsPerHour};
      c.series.push_back(ingest::StationObservation{st.station_id, t,
                                                    true_field(cfg, st.location, t) + noise});
    }
  }

  // north-south transects passing near a station
  std::set<std::int64_t> overpass_days;
  for (int tr = 0; tr < cfg.n_transects; ++tr) {
    const auto& st = c.stations[static_cast<std::size_t>(unit(rng) * cfg.n_stations) %
                                c.stations.size()];
    const auto day = static_cast<std::int64_t>(unit(rng) * cfg.days) % cfg.days;
    const auto t0 = cfg.start.seconds + day * kSecondsPerDay + 10 * kSecondsPerHour +
                    static_cast<std::int64_t>(unit(rng) * 4 * kSecondsPerHour);
    const double center_lon = st.location.longitude + (unit(rng) - 0.5) * 0.2;
    const double center_lat = st.location.latitude + (unit(rng) - 0.5) * 0.2;
    const double half_width_deg = 0.5 * cfg.transect_width_km /
                                  (111.32 * std::cos(geo::deg_to_rad(center_lat)));
    const double offset = gauss(rng) * cfg.transect_offset_std;
    overpass_days.insert(day);

    for (int s = 0; s < cfg.soundings_per_transect; ++s) {
      const double along = (unit(rng) * 2.0 - 1.0) * cfg.transect_half_length_deg;
      const double lat = std::clamp(center_lat + along, box.south, box.north);
      const double lon =
          std::clamp(center_lon + (unit(rng) * 2.0 - 1.0) * half_width_deg, box.west, box.east);
      // roughly 7 km/s ground speed
      const Timestamp t{t0 + static_cast<std::int64_t>(std::lround(along * 111.32 / 7.0))};
      const geo::GeoPoint p{lat, lon};
      ingest::SoundingRecord r;
      r.time = t;
      r.location = p;
      r.xco2_uncertainty = std::round((0.3 + unit(rng) * 0.5) * 1000.0) / 1000.0;
      r.quality_flag = unit(rng) < cfg.flagged_fraction ? 1 : 0;
      r.xco2 = column_field(cfg, p, t) + offset + gauss(rng) * cfg.noise_std +
               (r.quality_flag ? 5.0 : 0.0);
      c.soundings.push_back(r);
    }
  }
  std::stable_sort(c.soundings.begin(), c.soundings.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });

  // 1 degree weather lattice at 09, 12 and 15 UTC on overpass days
  const int lat0 = static_cast<int>(std::floor(box.south));
  const int lat1 = static_cast<int>(std::ceil(box.north));
  const int lon0 = static_cast<int>(std::floor(box.west));
  const int lon1 = static_cast<int>(std::ceil(box.east));
  for (std::int64_t day : overpass_days) {
    for (int hour : {9, 12, 15}) {
      const Timestamp t{cfg.start.seconds + day * kSecondsPerDay + hour * kSecondsPerHour};
      for (int lat = lat0; lat <= lat1; ++lat) {
        for (int lon = lon0; lon <= lon1; ++lon) {
          c.weather.push_back(weather_at(cfg, geo::GeoPoint{double(lat), double(lon)}, t));
        }
      }
    }
  }
  return c;
}

void write_campaign(const std::filesystem::path& dir, const Campaign& campaign) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  ingest::write_soundings(dir / kSoundingsFile, campaign.soundings);
  ingest::write_station_catalog(dir / kStationsFile, campaign.stations);
  ingest::write_station_series(dir / kSeriesFile, campaign.series);
  ingest::write_weather(dir / kWeatherFile, campaign.weather);
}

}  // namespace co2fuse::synth
