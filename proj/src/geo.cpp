#include "co2fuse/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "co2fuse/error.hpp"

namespace co2fuse::geo {

std::optional<GeoPoint> try_make_point(double latitude, double longitude) {
  if (!std::isfinite(latitude) || !std::isfinite(longitude)) return std::nullopt;
  if (latitude < -90.0 || latitude > 90.0) return std::nullopt;
  if (longitude < -180.0 || longitude > 180.0) return std::nullopt;
  if (longitude == 180.0) longitude = -180.0;
  return GeoPoint{latitude, longitude};
}

GeoPoint make_point(double latitude, double longitude) {
  auto p = try_make_point(latitude, longitude);
  if (!p) {
    throw Error(ErrorKind::InvalidArgument, "coordinate out of range: (" +
                                                std::to_string(latitude) + ", " +
                                                std::to_string(longitude) + ")");
  }
  return *p;
}

namespace {

double haversine_term(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = deg_to_rad(a.latitude);
  const double phi2 = deg_to_rad(b.latitude);
  const double s_lat = std::sin((phi2 - phi1) * 0.5);
  const double s_lon = std::sin(deg_to_rad(b.longitude - a.longitude) * 0.5);
  const double h = s_lat * s_lat + std::cos(phi1) * std::cos(phi2) * (s_lon * s_lon);
  return std::clamp(h, 0.0, 1.0);
}

}  // namespace

double geodesic_km(const GeoPoint& a, const GeoPoint& b) {
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(haversine_term(a, b)));
}

double central_angle_deg(const GeoPoint& a, const GeoPoint& b) {
  return 2.0 * std::asin(std::sqrt(haversine_term(a, b))) * (180.0 / kPi);
}

BoundingBox make_bbox(double south, double west, double north, double east) {
  const bool finite = std::isfinite(south) && std::isfinite(west) && std::isfinite(north) &&
                      std::isfinite(east);
  if (!finite || south < -90.0 || north > 90.0 || west < -180.0 || east > 180.0) {
    throw Error(ErrorKind::InvalidArgument, "bounding box coordinates out of range");
  }
  if (!(south < north)) throw Error(ErrorKind::InvalidArgument, "bounding box needs south < north");
  if (!(west < east)) {
    throw Error(ErrorKind::InvalidArgument,
                "bounding box needs west < east (antimeridian-spanning boxes are unsupported)");
  }
  return BoundingBox{south, west, north, east};
}

BoundingBox parse_bbox(std::string_view text) {
  double v[4];
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t comma = i < 3 ? text.find(',', pos) : text.size();
    if (comma == std::string_view::npos) {
      throw Error(ErrorKind::InvalidArgument, "bbox must be S,W,N,E: " + std::string(text));
    }
    std::string_view field = text.substr(pos, comma - pos);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v[i]);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
      throw Error(ErrorKind::InvalidArgument, "bbox must be S,W,N,E: " + std::string(text));
    }
    pos = comma + 1;
  }
  return make_bbox(v[0], v[1], v[2], v[3]);
}

namespace {

// Tolerates representation error so 1.0 / 0.25 counts as 4 cells.
std::size_t fit_count(double extent, double resolution) {
  return static_cast<std::size_t>(std::floor(extent / resolution + 1e-9));
}

}  // namespace

std::size_t GridSpec::rows() const { return fit_count(bbox.north - bbox.south, resolution); }
std::size_t GridSpec::cols() const { return fit_count(bbox.east - bbox.west, resolution); }

GridSpec make_grid_spec(const BoundingBox& bbox, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorKind::InvalidArgument, "grid resolution must be > 0");
  }
  GridSpec spec{make_bbox(bbox.south, bbox.west, bbox.north, bbox.east), resolution};
  if (spec.cell_count() == 0) {
    throw Error(ErrorKind::InvalidArgument, "grid resolution larger than the bounding box");
  }
  return spec;
}

std::vector<GeoPoint> cell_centers(const GridSpec& input) {
  const GridSpec spec = make_grid_spec(input.bbox, input.resolution);
  const std::size_t rows = spec.rows();
  const std::size_t cols = spec.cols();
  std::vector<GeoPoint> centers;
  centers.reserve(rows * cols);
  for (std::size_t r = rows; r-- > 0;) {
    const double lat = spec.bbox.south + (static_cast<double>(r) + 0.5) * spec.resolution;
    for (std::size_t c = 0; c < cols; ++c) {
      const double lon = spec.bbox.west + (static_cast<double>(c) + 0.5) * spec.resolution;
      centers.push_back(GeoPoint{lat, lon});
    }
  }
  return centers;
}

}  // namespace co2fuse::geo
