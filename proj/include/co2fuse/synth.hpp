#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "co2fuse/geo.hpp"
#include "co2fuse/ingest.hpp"
#include "co2fuse/time.hpp"

namespace co2fuse::synth {

struct SynthConfig {
  std::uint64_t seed = 7;
  geo::BoundingBox bbox{45.0, 0.0, 55.0, 15.0};
  Timestamp start = make_utc(2020, 1, 1);  // trend reference t0
  int days = 366;

  int n_stations = 12;
  int n_transects = 150;
  int soundings_per_transect = 60;
  double transect_width_km = 10.3;
  double transect_half_length_deg = 0.5;
  double flagged_fraction = 0.05;

  double noise_std = 1.0;             // ppm, per observation
  double transect_offset_std = 0.3;   // ppm, shared by a whole transect

  // surface field
  double base_ppm = 415.0;
  double trend_ppm_per_year = 2.4;
  double seasonal_amplitude_ppm = 6.0;
  double seasonal_phase = 0.0;         // radians
  double harmonic_amplitude_ppm = 2.0;
  double column_seasonal_fraction = 0.4;  // column seasonality relative to the surface

  // ppm per unit of weather anomaly
  double coupling_u10 = 0.4;
  double coupling_v10 = 0.3;
  double coupling_pressure = 0.0015;
  double coupling_t2m = -0.4;
  double coupling_tcwv = 0.1;

  double station_gap_fraction = 0.02;  // isolated missing hours
  int station_outages = 3;             // multi-day gaps per station
};

/// Throws invalid-argument on noise_std < 0, n_stations < 1 or other nonsense.
void validate(const SynthConfig& cfg);

/// Weather at any location and time. Anomalies are seeded per day, so every
/// grid node and station shares the same daily weather regime.
ingest::WeatherSample weather_at(const SynthConfig& cfg, const geo::GeoPoint& location, Timestamp t);

/// Surface CO2 seen by stations: base + trend + seasonal + spatial harmonics +
/// weather-coupled term.
double true_field(const SynthConfig& cfg, const geo::GeoPoint& location, Timestamp t);

/// Column-average CO2 seen from orbit: same trend and spatial pattern, damped
/// seasonality, no weather coupling.
double column_field(const SynthConfig& cfg, const geo::GeoPoint& location, Timestamp t);

struct Campaign {
  std::vector<ingest::SoundingRecord> soundings;
  std::vector<ingest::Station> stations;
  std::vector<ingest::StationObservation> series;
  std::vector<ingest::WeatherSample> weather;  // 1 degree nodes, 09/12/15 UTC on overpass days
};

Campaign generate_campaign(const SynthConfig& cfg);

inline constexpr const char* kSoundingsFile = "soundings.csv";
inline constexpr const char* kStationsFile = "stations.csv";
inline constexpr const char* kSeriesFile = "station_series.csv";
inline constexpr const char* kWeatherFile = "weather.csv";

/// Creates `dir` if needed and writes the four CSVs.
void write_campaign(const std::filesystem::path& dir, const Campaign& campaign);

}  // namespace co2fuse::synth
