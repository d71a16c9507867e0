#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "co2fuse/ingest.hpp"

namespace co2fuse::fusion {

inline constexpr std::size_t kFeatureCount = 14;

using FeatureVector = std::array<double, kFeatureCount>;

/// Canonical feature order. Model files and dataset.csv freeze this order.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "xco2",
    "xco2_uncertainty",
    "latitude",
    "longitude",
    "time_epoch_years",
    "u10",
    "v10",
    "surface_pressure",
    "t2m",
    "skin_temperature",
    "vint_temperature",
    "tcwv",
    "cloud_base_height",
    "total_cloud_cover",
};

enum Feature : std::size_t {
  kXco2 = 0,
  kXco2Uncertainty,
  kLatitude,
  kLongitude,
  kTimeEpochYears,
  kU10,
  kV10,
  kSurfacePressure,
  kT2m,
  kSkinTemperature,
  kVintTemperature,
  kTcwv,
  kCloudBaseHeight,
  kTotalCloudCover,
};

/// Comma-joined canonical names; stored in model files and checked at predict time.
std::string feature_fingerprint();

struct LabeledSample {
  FeatureVector features{};
  double label = 0.0;  // station CO2, ppm
  std::string station_id;
  Timestamp sounding_time;
  double station_distance_km = 0.0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct MatchConfig {
  double max_distance_km = 25.0;
  int max_time_minutes = 60;
  double max_weather_distance_deg = 2.0;
  std::int64_t max_weather_age_seconds = 6 * kSecondsPerHour;
};

/// Validates positivity of the thresholds; throws invalid-argument.
void validate(const MatchConfig& cfg);

/// Stations sorted by id with their observation series sorted by time.
class StationIndex {
 public:
  struct Entry {
    ingest::Station station;
    std::vector<ingest::StationObservation> series;
  };

  StationIndex(const std::vector<ingest::Station>& catalog,
               const std::vector<ingest::StationObservation>& series);

  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry* find(std::string_view station_id) const;

 private:
  std::vector<Entry> entries_;
};

struct Match {
  std::string station_id;
  ingest::StationObservation observation;
  double distance_km = 0.0;
};

/// Spatially nearest station (ties: smallest id) that has an observation within
/// +-max_time_minutes, paired with its temporally nearest observation (ties:
/// earlier). Throws invalid-argument on an empty catalog.
std::optional<Match> match_sounding(const ingest::SoundingRecord& s, const StationIndex& stations,
                                    const MatchConfig& cfg);

/// Sample minimizing (geodesic distance, |dt|) lexicographically; ties in dt go
/// to the earlier sample. Throws no-data-error on an empty archive and
/// stale-weather-error when the winner is farther than the configured limits.
const ingest::WeatherSample& nearest_weather(const ingest::SoundingRecord& s,
                                             const ingest::WeatherArchive& archive,
                                             const MatchConfig& cfg = {});

FeatureVector make_features(const ingest::SoundingRecord& s, const ingest::WeatherSample& w);

struct MatchReport {
  std::size_t soundings = 0;
  std::size_t matched = 0;
  std::size_t no_station = 0;      // no station within radius and time window
  std::size_t stale_weather = 0;   // matched, but no usable weather sample

  double match_rate() const {
    return soundings == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(soundings);
  }
};

struct BuildResult {
  std::vector<LabeledSample> samples;
  MatchReport report;
};

/// One sample per matched sounding, ordered by (sounding time, station id).
/// Soundings whose weather is stale are skipped and counted. Throws
/// empty-dataset-error when nothing matches.
BuildResult build_dataset(const std::vector<ingest::SoundingRecord>& soundings,
                          const StationIndex& stations, const ingest::WeatherArchive& weather,
                          const MatchConfig& cfg);

struct Split {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

/// Whole-station holdout. Throws invalid-argument for an id absent from the dataset.
Split split_by_station(const std::vector<LabeledSample>& dataset,
                       const std::set<std::string, std::less<>>& holdout_ids);

/// Per-feature mean and population standard deviation.
struct NormStats {
  FeatureVector mean{};
  FeatureVector std{};

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// Throws empty-dataset-error for no rows and degenerate-feature-error naming
/// the first constant feature.
NormStats fit_norm_stats(std::span<const FeatureVector> rows);
NormStats fit_norm_stats(std::span<const LabeledSample> train);

FeatureVector standardize(const FeatureVector& v, const NormStats& stats);

std::vector<FeatureVector> features_of(std::span<const LabeledSample> samples);
std::vector<double> labels_of(std::span<const LabeledSample> samples);

void write_dataset(std::ostream& out, const std::vector<LabeledSample>& samples);
void write_dataset(const std::filesystem::path& path, const std::vector<LabeledSample>& samples);
/// Strict reader for the dataset cache: any bad row is a schema-error.
std::vector<LabeledSample> read_dataset(std::istream& in);
std::vector<LabeledSample> read_dataset(const std::filesystem::path& path);

}  // namespace co2fuse::fusion
