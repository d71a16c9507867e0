#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace co2fuse::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

/// Latitude in [-90, 90], longitude normalized into [-180, 180).
struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Validates and normalizes; throws invalid-argument on out-of-range or
/// non-finite coordinates. Longitudes in [-180, 180] are accepted and 180 maps
/// to -180.
GeoPoint make_point(double latitude, double longitude);

/// Same checks without throwing.
std::optional<GeoPoint> try_make_point(double latitude, double longitude);

/// Haversine great-circle distance on a sphere of radius kEarthRadiusKm.
double geodesic_km(const GeoPoint& a, const GeoPoint& b);

/// Central angle in degrees between two points.
double central_angle_deg(const GeoPoint& a, const GeoPoint& b);

struct BoundingBox {
  double south = 0.0;
  double west = 0.0;
  double north = 0.0;
  double east = 0.0;

  bool contains(const GeoPoint& p) const {
    return p.latitude >= south && p.latitude <= north && p.longitude >= west &&
           p.longitude <= east;
  }
};

/// Throws invalid-argument unless south < north and west < east within range.
/// Boxes spanning the antimeridian (west > east) are rejected.
BoundingBox make_bbox(double south, double west, double north, double east);

/// Parses `S,W,N,E` in decimal degrees.
BoundingBox parse_bbox(std::string_view text);

struct GridSpec {
  BoundingBox bbox;
  double resolution = 1.0;

  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t cell_count() const { return rows() * cols(); }
};

/// Validates the bbox and resolution and that at least one cell fits.
GridSpec make_grid_spec(const BoundingBox& bbox, double resolution);

/// Row-major cell centers, northernmost row first, west to east within a row.
/// Rows are anchored at the south edge: row r (counted from the south) is
/// centered at south + (r + 0.5) * resolution.
std::vector<GeoPoint> cell_centers(const GridSpec& spec);

}  // namespace co2fuse::geo
