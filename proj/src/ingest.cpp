#include "co2fuse/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string_view>
#include <tuple>

#include "co2fuse/error.hpp"
#include "csv.hpp"

namespace co2fuse::ingest {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

// Drives the per-row loop shared by every reader. `parse_row` returns false
// for a malformed row.
template <class ParseRow>
ReadReport for_each_row(std::istream& in, const std::vector<std::string_view>& columns,
                        std::string_view label, ParseRow&& parse_row) {
  const auto header_fields = csv::read_header(in, label);
  const csv::Header header(header_fields, columns, label);
  const std::size_t needed = header.max_index() + 1;

  ReadReport report;
  std::string line;
  std::vector<std::string> fields;
  std::vector<std::string_view> row(columns.size());
  while (std::getline(in, line)) {
    if (csv::is_blank(line)) continue;
    ++report.data_rows;
    if (!csv::split_line(line, fields) || fields.size() < needed) {
      ++report.malformed;
      continue;
    }
    for (std::size_t i = 0; i < columns.size(); ++i) row[i] = csv::trim(fields[header[i]]);
    if (!parse_row(row, report)) ++report.malformed;
  }
  if (report.data_rows > 0 && 2 * report.malformed > report.data_rows) {
    throw Error(ErrorKind::CorruptInput, std::string(label) + ": " +
                                             std::to_string(report.malformed) + " of " +
                                             std::to_string(report.data_rows) +
                                             " rows malformed");
  }
  return report;
}

std::optional<geo::GeoPoint> parse_point(std::string_view lat, std::string_view lon) {
  const auto la = csv::parse_finite(lat);
  const auto lo = csv::parse_finite(lon);
  if (!la || !lo) return std::nullopt;
  return geo::try_make_point(*la, *lo);
}

const std::vector<std::string_view> kSoundingColumns = {
    "time_utc", "latitude_deg", "longitude_deg", "xco2_ppm", "xco2_uncertainty_ppm",
    "quality_flag"};
const std::vector<std::string_view> kStationColumns = {"station_id", "latitude_deg",
                                                       "longitude_deg", "elevation_m"};
const std::vector<std::string_view> kSeriesColumns = {"station_id", "time_utc", "co2_ppm"};
const std::vector<std::string_view> kWeatherColumns = {
    "time_utc",         "latitude_deg",       "longitude_deg",    "u10_mps",
    "v10_mps",          "surface_pressure_pa", "t2m_k",           "skin_temperature_k",
    "vint_temperature", "tcwv_kgm2",          "cloud_base_height_m", "total_cloud_cover"};

bool on_lattice(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() < 2) return true;
  double step = values[1] - values[0];
  for (std::size_t i = 2; i < values.size(); ++i) step = std::min(step, values[i] - values[i - 1]);
  for (double v : values) {
    const double k = (v - values.front()) / step;
    if (std::abs(k - std::round(k)) > 1e-6) return false;
  }
  return true;
}

}  // namespace

ReadResult<SoundingRecord> read_soundings(std::istream& in, const SoundingReadOptions& options) {
  ReadResult<SoundingRecord> result;
  result.report = for_each_row(
      in, kSoundingColumns, "soundings",
      [&](const std::vector<std::string_view>& f, ReadReport& report) {
        const auto time = parse_rfc3339(f[0]);
        const auto point = parse_point(f[1], f[2]);
        const auto xco2 = csv::parse_finite(f[3]);
        const auto unc = csv::parse_finite(f[4]);
        const auto flag = csv::parse_int(f[5]);
        if (!time || !point || !xco2 || !unc || !flag) return false;
        if (*unc < 0.0 || *xco2 <= kMinPlausibleXco2 || *xco2 >= kMaxPlausibleXco2) return false;
        if (*flag < -2147483648LL || *flag > 2147483647LL) return false;
        const bool out_of_period = (options.period_start && *time < *options.period_start) ||
                                   (options.period_end && *time > *options.period_end);
        if ((options.quality_filter && *flag != 0) || out_of_period) {
          ++report.filtered;
          return true;
        }
        result.records.push_back(
            SoundingRecord{*time, *point, *xco2, *unc, static_cast<int>(*flag)});
        return true;
      });
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const SoundingRecord& a, const SoundingRecord& b) { return a.time < b.time; });
  return result;
}

ReadResult<SoundingRecord> read_soundings(const std::filesystem::path& path,
                                          const SoundingReadOptions& options) {
  auto in = open_input(path);
  return read_soundings(in, options);
}

std::vector<Station> read_station_catalog(std::istream& in) {
  std::vector<Station> stations;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 1;
  const auto report = for_each_row(in, kStationColumns, "stations",
               [&](const std::vector<std::string_view>& f, ReadReport&) {
                 ++line_no;
                 const auto point = parse_point(f[1], f[2]);
                 if (f[0].empty() || !point) {
                   throw Error(ErrorKind::Schema, "stations: invalid row " +
                                                      std::to_string(line_no) + " (id '" +
                                                      std::string(f[0]) + "')");
                 }
                 std::optional<double> elevation;
                 if (!f[3].empty()) {
                   elevation = csv::parse_finite(f[3]);
                   if (!elevation) {
                     throw Error(ErrorKind::Schema, "stations: invalid elevation for '" +
                                                        std::string(f[0]) + "'");
                   }
                 }
                 if (!seen.emplace(f[0]).second) {
                   throw Error(ErrorKind::DuplicateKey,
                               "stations: duplicate station id '" + std::string(f[0]) + "'");
                 }
                 stations.push_back(Station{std::string(f[0]), *point, elevation});
                 return true;
               });
  if (report.malformed > 0) {
    throw Error(ErrorKind::Schema, "stations: " + std::to_string(report.malformed) +
                                       " row(s) with missing fields");
  }
  return stations;
}

std::vector<Station> read_station_catalog(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_station_catalog(in);
}

ReadResult<StationObservation> read_station_series(std::istream& in) {
  ReadResult<StationObservation> result;
  result.report = for_each_row(in, kSeriesColumns, "station_series",
                               [&](const std::vector<std::string_view>& f, ReadReport&) {
                                 const auto time = parse_rfc3339(f[1]);
                                 const auto co2 = csv::parse_finite(f[2]);
                                 if (f[0].empty() || !time || !co2 || *co2 <= 0.0) return false;
                                 result.records.push_back(
                                     StationObservation{std::string(f[0]), *time, *co2});
                                 return true;
                               });
  auto& recs = result.records;
  std::stable_sort(recs.begin(), recs.end(),
                   [](const StationObservation& a, const StationObservation& b) {
                     return std::tie(a.station_id, a.time) < std::tie(b.station_id, b.time);
                   });
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if (recs[i].station_id == recs[i - 1].station_id && recs[i].time == recs[i - 1].time) {
      throw Error(ErrorKind::DuplicateKey, "station_series: duplicate observation for '" +
                                               recs[i].station_id + "' at " +
                                               format_rfc3339(recs[i].time));
    }
  }
  return result;
}

ReadResult<StationObservation> read_station_series(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_station_series(in);
}

ReadResult<WeatherSample> read_weather_samples(std::istream& in,
                                               const WeatherReadOptions& options) {
  ReadResult<WeatherSample> result;
  result.report = for_each_row(
      in, kWeatherColumns, "weather",
      [&](const std::vector<std::string_view>& f, ReadReport& report) {
        const auto time = parse_rfc3339(f[0]);
        const auto point = parse_point(f[1], f[2]);
        if (!time || !point) return false;
        double v[9];
        for (int i = 0; i < 9; ++i) {
          const auto parsed = csv::parse_finite(f[3 + i]);
          if (!parsed) return false;
          v[i] = *parsed;
        }
        WeatherSample s{*time, *point, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
        if (s.total_cloud_cover < 0.0 || s.total_cloud_cover > 1.0) return false;
        if (s.surface_pressure <= 0.0 || s.t2m <= 0.0 || s.skin_temperature <= 0.0 ||
            s.tcwv < 0.0)
          return false;
        if (!options.window.contains(s.time)) {
          ++report.filtered;
          return true;
        }
        result.records.push_back(s);
        return true;
      });
  return result;
}

WeatherReadResult read_weather(std::istream& in, const WeatherReadOptions& options) {
  auto raw = read_weather_samples(in, options);
  return WeatherReadResult{WeatherArchive(std::move(raw.records)), raw.report};
}

WeatherReadResult read_weather(const std::filesystem::path& path,
                               const WeatherReadOptions& options) {
  auto in = open_input(path);
  return read_weather(in, options);
}

WeatherArchive::WeatherArchive(std::vector<WeatherSample> samples) {
  std::vector<double> lats, lons;
  lats.reserve(samples.size());
  lons.reserve(samples.size());
  for (const auto& s : samples) {
    lats.push_back(s.location.latitude);
    lons.push_back(s.location.longitude);
  }
  if (!on_lattice(std::move(lats)) || !on_lattice(std::move(lons))) {
    throw Error(ErrorKind::Schema, "weather: grid nodes are not on a regular lattice");
  }

  std::stable_sort(samples.begin(), samples.end(),
                   [](const WeatherSample& a, const WeatherSample& b) {
                     return std::tie(a.location.latitude, a.location.longitude, a.time) <
                            std::tie(b.location.latitude, b.location.longitude, b.time);
                   });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (nodes_.empty() || !(nodes_.back().location == s.location)) {
      nodes_.push_back(Node{s.location, {}});
    } else if (nodes_.back().samples.back().time == s.time) {
      throw Error(ErrorKind::DuplicateKey, "weather: duplicate sample at " +
                                               format_rfc3339(s.time));
    }
    nodes_.back().samples.push_back(s);
  }
  size_ = samples.size();
}

std::vector<WeatherSample> WeatherArchive::samples() const {
  std::vector<WeatherSample> out;
  out.reserve(size_);
  for (const auto& node : nodes_) out.insert(out.end(), node.samples.begin(), node.samples.end());
  return out;
}

// --- writers -------------------------------------------------------------

void write_soundings(std::ostream& out, const std::vector<SoundingRecord>& records) {
  out << "time_utc,latitude_deg,longitude_deg,xco2_ppm,xco2_uncertainty_ppm,quality_flag\n";
  for (const auto& r : records) {
    out << format_rfc3339(r.time) << ',' << csv::format_double(r.location.latitude) << ','
        << csv::format_double(r.location.longitude) << ',' << csv::format_double(r.xco2) << ','
        << csv::format_double(r.xco2_uncertainty) << ',' << r.quality_flag << '\n';
  }
}

void write_station_catalog(std::ostream& out, const std::vector<Station>& stations) {
  out << "station_id,latitude_deg,longitude_deg,elevation_m\n";
  for (const auto& s : stations) {
    out << csv::quote_if_needed(s.station_id) << ',' << csv::format_double(s.location.latitude)
        << ',' << csv::format_double(s.location.longitude) << ',';
    if (s.elevation_m) out << csv::format_double(*s.elevation_m);
    out << '\n';
  }
}

void write_station_series(std::ostream& out, const std::vector<StationObservation>& series) {
  out << "station_id,time_utc,co2_ppm\n";
  for (const auto& o : series) {
    out << csv::quote_if_needed(o.station_id) << ',' << format_rfc3339(o.time) << ','
        << csv::format_double(o.co2) << '\n';
  }
}

void write_weather(std::ostream& out, const std::vector<WeatherSample>& samples) {
  out << "time_utc,latitude_deg,longitude_deg,u10_mps,v10_mps,surface_pressure_pa,t2m_k,"
         "skin_temperature_k,vint_temperature,tcwv_kgm2,cloud_base_height_m,total_cloud_cover\n";
  for (const auto& s : samples) {
    out << format_rfc3339(s.time) << ',' << csv::format_double(s.location.latitude) << ','
        << csv::format_double(s.location.longitude) << ',' << csv::format_double(s.u10) << ','
        << csv::format_double(s.v10) << ',' << csv::format_double(s.surface_pressure) << ','
        << csv::format_double(s.t2m) << ',' << csv::format_double(s.skin_temperature) << ','
        << csv::format_double(s.vint_temperature) << ',' << csv::format_double(s.tcwv) << ','
        << csv::format_double(s.cloud_base_height) << ','
        << csv::format_double(s.total_cloud_cover) << '\n';
  }
}

void write_soundings(const std::filesystem::path& path, const std::vector<SoundingRecord>& records) {
  auto out = open_output(path);
  write_soundings(out, records);
}

void write_station_catalog(const std::filesystem::path& path, const std::vector<Station>& stations) {
  auto out = open_output(path);
  write_station_catalog(out, stations);
}

void write_station_series(const std::filesystem::path& path,
                          const std::vector<StationObservation>& series) {
  auto out = open_output(path);
  write_station_series(out, series);
}

void write_weather(const std::filesystem::path& path, const std::vector<WeatherSample>& samples) {
  auto out = open_output(path);
  write_weather(out, samples);
}

}  // namespace co2fuse::ingest
