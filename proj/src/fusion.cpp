#include "co2fuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include "co2fuse/error.hpp"
#include "csv.hpp"

namespace co2fuse::fusion {

using ingest::SoundingRecord;
using ingest::StationObservation;
using ingest::WeatherArchive;
using ingest::WeatherSample;

std::string feature_fingerprint() {
  std::string out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (i) out += ',';
    out += kFeatureNames[i];
  }
  return out;
}

void validate(const MatchConfig& cfg) {
  if (!(cfg.max_distance_km > 0.0) || cfg.max_time_minutes <= 0 ||
      !(cfg.max_weather_distance_deg > 0.0) || cfg.max_weather_age_seconds <= 0) {
    throw Error(ErrorKind::InvalidArgument, "match thresholds must be positive");
  }
}

StationIndex::StationIndex(const std::vector<ingest::Station>& catalog,
                           const std::vector<StationObservation>& series) {
  entries_.reserve(catalog.size());
  for (const auto& s : catalog) entries_.push_back(Entry{s, {}});
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.station.station_id < b.station.station_id;
  });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].station.station_id == entries_[i - 1].station.station_id) {
      throw Error(ErrorKind::DuplicateKey,
                  "duplicate station id '" + entries_[i].station.station_id + "'");
    }
  }
  for (const auto& obs : series) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), obs.station_id,
                               [](const Entry& e, const std::string& id) {
                                 return e.station.station_id < id;
                               });
    // observations from stations missing in the catalog have no location and are ignored
    if (it != entries_.end() && it->station.station_id == obs.station_id) {
      it->series.push_back(obs);
    }
  }
  for (auto& e : entries_) {
    std::stable_sort(e.series.begin(), e.series.end(),
                     [](const StationObservation& a, const StationObservation& b) {
                       return a.time < b.time;
                     });
  }
}

const StationIndex::Entry* StationIndex::find(std::string_view station_id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), station_id,
                             [](const Entry& e, std::string_view id) {
                               return e.station.station_id < id;
                             });
  if (it == entries_.end() || it->station.station_id != station_id) return nullptr;
  return &*it;
}

namespace {

std::int64_t abs_dt(Timestamp a, Timestamp b) {
  return a.seconds > b.seconds ? a.seconds - b.seconds : b.seconds - a.seconds;
}

// Temporally nearest observation within `max_dt` seconds; ties go to the earlier one.
const StationObservation* nearest_observation(const std::vector<StationObservation>& series,
                                              Timestamp t, std::int64_t max_dt) {
  auto it = std::lower_bound(series.begin(), series.end(), t,
                             [](const StationObservation& o, Timestamp when) {
                               return o.time < when;
                             });
  const StationObservation* best = nullptr;
  if (it != series.begin()) best = &*std::prev(it);
  if (it != series.end() && (best == nullptr || abs_dt(it->time, t) < abs_dt(best->time, t))) {
    best = &*it;
  }
  if (best == nullptr || abs_dt(best->time, t) > max_dt) return nullptr;
  return best;
}

}  // namespace

std::optional<Match> match_sounding(const SoundingRecord& s, const StationIndex& stations,
                                    const MatchConfig& cfg) {
  if (stations.empty()) throw Error(ErrorKind::InvalidArgument, "station catalog is empty");
  const std::int64_t max_dt = static_cast<std::int64_t>(cfg.max_time_minutes) * 60;

  std::optional<Match> best;
  // entries are sorted by id, so keeping the first strictly-nearer station breaks ties by id
  for (const auto& entry : stations.entries()) {
    const double d = geo::geodesic_km(s.location, entry.station.location);
    if (d > cfg.max_distance_km) continue;
    if (best && !(d < best->distance_km)) continue;
    const auto* obs = nearest_observation(entry.series, s.time, max_dt);
    if (obs == nullptr) continue;
    best = Match{entry.station.station_id, *obs, d};
  }
  return best;
}

const WeatherSample& nearest_weather(const SoundingRecord& s, const WeatherArchive& archive,
                                     const MatchConfig& cfg) {
  if (archive.empty()) throw Error(ErrorKind::NoData, "weather archive is empty");

  double best_d = std::numeric_limits<double>::infinity();
  const WeatherSample* best = nullptr;
  for (const auto& node : archive.nodes()) {
    const double d = geo::geodesic_km(s.location, node.location);
    if (d > best_d) continue;
    auto it = std::lower_bound(node.samples.begin(), node.samples.end(), s.time,
                               [](const WeatherSample& w, Timestamp when) { return w.time < when; });
    const WeatherSample* candidate = nullptr;
    if (it != node.samples.begin()) candidate = &*std::prev(it);
    if (it != node.samples.end() &&
        (candidate == nullptr || abs_dt(it->time, s.time) < abs_dt(candidate->time, s.time))) {
      candidate = &*it;
    }
    if (d < best_d) {
      best_d = d;
      best = candidate;
      continue;
    }
    // equal distance: smaller |dt| wins, then the earlier sample; nodes are
    // visited in (lat, lon) order so a full tie keeps the first node
    const auto cand_dt = abs_dt(candidate->time, s.time);
    const auto best_dt = abs_dt(best->time, s.time);
    if (cand_dt < best_dt || (cand_dt == best_dt && candidate->time < best->time)) {
      best = candidate;
    }
  }

  const double angle = geo::central_angle_deg(s.location, best->location);
  if (angle > cfg.max_weather_distance_deg ||
      abs_dt(best->time, s.time) > cfg.max_weather_age_seconds) {
    throw Error(ErrorKind::StaleWeather, "nearest weather sample for sounding at " +
                                             format_rfc3339(s.time) + " is " +
                                             std::to_string(angle) + " deg / " +
                                             std::to_string(abs_dt(best->time, s.time)) +
                                             " s away");
  }
  return *best;
}

FeatureVector make_features(const SoundingRecord& s, const WeatherSample& w) {
  return FeatureVector{
      s.xco2,
      s.xco2_uncertainty,
      s.location.latitude,
      s.location.longitude,
      epoch_years(s.time),
      w.u10,
      w.v10,
      w.surface_pressure,
      w.t2m,
      w.skin_temperature,
      w.vint_temperature,
      w.tcwv,
      w.cloud_base_height,
      w.total_cloud_cover,
  };
}

BuildResult build_dataset(const std::vector<SoundingRecord>& soundings,
                          const StationIndex& stations, const WeatherArchive& weather,
                          const MatchConfig& cfg) {
  validate(cfg);
  if (weather.empty()) throw Error(ErrorKind::NoData, "weather archive is empty");
  BuildResult result;
  result.report.soundings = soundings.size();
  for (const auto& s : soundings) {
    const auto match = match_sounding(s, stations, cfg);
    if (!match) {
      ++result.report.no_station;
      continue;
    }
    const WeatherSample* w = nullptr;
    try {
      w = &nearest_weather(s, weather, cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StaleWeather) throw;
      ++result.report.stale_weather;
      continue;
    }
    result.samples.push_back(LabeledSample{make_features(s, *w), match->observation.co2,
                                           match->station_id, s.time, match->distance_km});
  }
  result.report.matched = result.samples.size();
  if (result.samples.empty()) {
    throw Error(ErrorKind::EmptyDataset,
                "no sounding matched a station within " + std::to_string(cfg.max_distance_km) +
                    " km and " + std::to_string(cfg.max_time_minutes) + " min");
  }
  std::stable_sort(result.samples.begin(), result.samples.end(),
                   [](const LabeledSample& a, const LabeledSample& b) {
                     return std::tie(a.sounding_time, a.station_id) <
                            std::tie(b.sounding_time, b.station_id);
                   });
  return result;
}

Split split_by_station(const std::vector<LabeledSample>& dataset,
                       const std::set<std::string, std::less<>>& holdout_ids) {
  std::set<std::string_view> present;
  for (const auto& s : dataset) present.insert(s.station_id);
  for (const auto& id : holdout_ids) {
    if (!present.contains(id)) {
      throw Error(ErrorKind::InvalidArgument, "holdout station '" + id + "' not in dataset");
    }
  }
  Split split;
  for (const auto& s : dataset) {
    (holdout_ids.contains(s.station_id) ? split.test : split.train).push_back(s);
  }
  return split;
}

NormStats fit_norm_stats(std::span<const FeatureVector> rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptyDataset, "cannot fit normalization on no rows");
  NormStats stats;
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw Error(ErrorKind::DegenerateFeature,
                  "feature '" + std::string(kFeatureNames[j]) + "' is constant");
    }
    stats.mean[j] = mean;
    stats.std[j] = sd;
  }
  return stats;
}

NormStats fit_norm_stats(std::span<const LabeledSample> train) {
  const auto rows = features_of(train);
  return fit_norm_stats(std::span<const FeatureVector>(rows));
}

FeatureVector standardize(const FeatureVector& v, const NormStats& stats) {
  FeatureVector out;
  for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = (v[j] - stats.mean[j]) / stats.std[j];
  return out;
}

std::vector<FeatureVector> features_of(std::span<const LabeledSample> samples) {
  std::vector<FeatureVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.features);
  return out;
}

std::vector<double> labels_of(std::span<const LabeledSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

// --- dataset.csv ---------------------------------------------------------

void write_dataset(std::ostream& out, const std::vector<LabeledSample>& samples) {
  out << feature_fingerprint() << ",label_ppm,station_id,time_utc,distance_km\n";
  for (const auto& s : samples) {
    for (double v : s.features) out << csv::format_double(v) << ',';
    out << csv::format_double(s.label) << ',' << csv::quote_if_needed(s.station_id) << ','
        << format_rfc3339(s.sounding_time) << ',' << csv::format_double(s.station_distance_km)
        << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const std::vector<LabeledSample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_dataset(out, samples);
}

std::vector<LabeledSample> read_dataset(std::istream& in) {
  std::vector<std::string_view> columns(kFeatureNames.begin(), kFeatureNames.end());
  for (std::string_view extra : {"label_ppm", "station_id", "time_utc", "distance_km"}) {
    columns.push_back(extra);
  }
  const auto header_fields = csv::read_header(in, "dataset");
  const csv::Header header(header_fields, columns, "dataset");

  std::vector<LabeledSample> samples;
  std::string line;
  std::vector<std::string> fields;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    const auto bad = [&] {
      return Error(ErrorKind::Schema, "dataset: invalid row " + std::to_string(line_no));
    };
    if (!csv::split_line(line, fields) || fields.size() <= header.max_index()) throw bad();
    LabeledSample s;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const auto v = csv::parse_finite(fields[header[j]]);
      if (!v) throw bad();
      s.features[j] = *v;
    }
    const auto label = csv::parse_finite(fields[header[kFeatureCount]]);
    const auto time = parse_rfc3339(csv::trim(fields[header[kFeatureCount + 2]]));
    const auto dist = csv::parse_finite(fields[header[kFeatureCount + 3]]);
    s.station_id = std::string(csv::trim(fields[header[kFeatureCount + 1]]));
    if (!label || !time || !dist || s.station_id.empty()) throw bad();
    s.label = *label;
    s.sounding_time = *time;
    s.station_distance_km = *dist;
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<LabeledSample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace co2fuse::fusion
