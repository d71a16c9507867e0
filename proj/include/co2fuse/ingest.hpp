#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "co2fuse/geo.hpp"
#include "co2fuse/time.hpp"

namespace co2fuse::ingest {

/// One satellite xCO2 retrieval.
struct SoundingRecord {
  Timestamp time;
  geo::GeoPoint location;
  double xco2 = 0.0;              // ppm
  double xco2_uncertainty = 0.0;  // ppm
  int quality_flag = 0;           // 0 = good

  friend bool operator==(const SoundingRecord&, const SoundingRecord&) = default;
};

struct Station {
  std::string station_id;
  geo::GeoPoint location;
  std::optional<double> elevation_m;

  friend bool operator==(const Station&, const Station&) = default;
};

/// Hourly dry-air CO2 average from one station.
struct StationObservation {
  std::string station_id;
  Timestamp time;
  double co2 = 0.0;  // ppm

  friend bool operator==(const StationObservation&, const StationObservation&) = default;
};

struct WeatherSample {
  Timestamp time;
  geo::GeoPoint location;
  double u10 = 0.0;               // m/s
  double v10 = 0.0;               // m/s
  double surface_pressure = 0.0;  // Pa
  double t2m = 0.0;               // K
  double skin_temperature = 0.0;  // K
  double vint_temperature = 0.0;  // source units, passed through
  double tcwv = 0.0;              // kg/m^2
  double cloud_base_height = 0.0; // m
  double total_cloud_cover = 0.0; // [0, 1]

  friend bool operator==(const WeatherSample&, const WeatherSample&) = default;
};

/// Row accounting for one file read.
struct ReadReport {
  std::size_t data_rows = 0;   // non-blank rows after the header
  std::size_t malformed = 0;   // rejected as unparsable or implausible
  std::size_t filtered = 0;    // valid but dropped by a filter (quality, window, period)
};

template <class T>
struct ReadResult {
  std::vector<T> records;
  ReadReport report;
};

/// Lattice-indexed weather samples, grouped per grid node and sorted by time.
class WeatherArchive {
 public:
  struct Node {
    geo::GeoPoint location;
    std::vector<WeatherSample> samples;  // ascending time
  };

  WeatherArchive() = default;
  /// Throws duplicate-key-error on repeated (node, time) and schema-error when
  /// nodes do not sit on a common regular lattice.
  explicit WeatherArchive(std::vector<WeatherSample> samples);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return size_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  /// Every sample, ordered by (latitude, longitude, time).
  std::vector<WeatherSample> samples() const;

 private:
  std::vector<Node> nodes_;
  std::size_t size_ = 0;
};

struct SoundingReadOptions {
  bool quality_filter = true;
  std::optional<Timestamp> period_start;  // inclusive
  std::optional<Timestamp> period_end;    // inclusive
};

struct WeatherReadOptions {
  DailyWindow window;
};

inline constexpr double kMinPlausibleXco2 = 300.0;
inline constexpr double kMaxPlausibleXco2 = 600.0;

// Readers accept a path or an already-open stream. Errors: io-error (path
// cannot be opened), schema-error (missing header or column), corrupt-input-error
// (more than half of the data rows malformed).

ReadResult<SoundingRecord> read_soundings(const std::filesystem::path& path,
                                          const SoundingReadOptions& options = {});
ReadResult<SoundingRecord> read_soundings(std::istream& in, const SoundingReadOptions& options = {});

/// Catalog rows are validated strictly: any invalid row is a schema-error and a
/// repeated station id is a duplicate-key-error.
std::vector<Station> read_station_catalog(const std::filesystem::path& path);
std::vector<Station> read_station_catalog(std::istream& in);

/// Output sorted by (station_id, time). Repeated (station_id, time) pairs are a
/// duplicate-key-error; gaps in a series are accepted as-is.
ReadResult<StationObservation> read_station_series(const std::filesystem::path& path);
ReadResult<StationObservation> read_station_series(std::istream& in);

/// Samples outside the daily window are counted in `filtered`.
ReadResult<WeatherSample> read_weather_samples(std::istream& in,
                                               const WeatherReadOptions& options = {});

struct WeatherReadResult {
  WeatherArchive archive;
  ReadReport report;
};
WeatherReadResult read_weather(const std::filesystem::path& path,
                               const WeatherReadOptions& options = {});
WeatherReadResult read_weather(std::istream& in, const WeatherReadOptions& options = {});

void write_soundings(std::ostream& out, const std::vector<SoundingRecord>& records);
void write_station_catalog(std::ostream& out, const std::vector<Station>& stations);
void write_station_series(std::ostream& out, const std::vector<StationObservation>& series);
void write_weather(std::ostream& out, const std::vector<WeatherSample>& samples);

void write_soundings(const std::filesystem::path& path, const std::vector<SoundingRecord>& records);
void write_station_catalog(const std::filesystem::path& path, const std::vector<Station>& stations);
void write_station_series(const std::filesystem::path& path,
                          const std::vector<StationObservation>& series);
void write_weather(const std::filesystem::path& path, const std::vector<WeatherSample>& samples);

}  // namespace co2fuse::ingest
