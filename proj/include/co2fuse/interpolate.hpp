#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "co2fuse/geo.hpp"

namespace co2fuse::interpolate {

struct ValuedPoint {
  geo::GeoPoint location;
  double value = 0.0;  // ppm

  friend bool operator==(const ValuedPoint&, const ValuedPoint&) = default;
};

struct KnnParams {
  static constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

  std::size_t k = 200;      // kAll = every point
  double p = 0.05;          // weight decay exponent, w = 1 / d^p
  double epsilon_km = 1e-6; // distances below this are clamped
};

/// Validates k >= 1, p >= 0 and epsilon_km > 0; throws invalid-argument.
void validate(const KnnParams& params);

/// "all" or a positive integer.
std::size_t parse_k(const std::string& text);
std::string format_k(std::size_t k);

struct Neighbor {
  std::size_t index;  // position in KnnIndex::points()
  double distance_km;
};

/// Latitude/longitude bucket index over a fixed point set.
///
/// Points are stored in canonical (latitude, longitude, value) order. Neighbor
/// ranking is (distance, canonical position), and weighted sums are accumulated
/// in canonical order, so results never depend on the order of the input list.
class KnnIndex {
 public:
  /// bucket_deg <= 0 picks a size giving roughly 16 points per occupied bucket.
  explicit KnnIndex(std::vector<ValuedPoint> points, double bucket_deg = 0.0);

  const std::vector<ValuedPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double bucket_deg() const { return bucket_deg_; }

  /// The min(k, size()) nearest points ordered by (distance, index).
  std::vector<Neighbor> nearest(const geo::GeoPoint& query, std::size_t k) const;

  /// Weighted KNN estimate at `query`:
  ///  1. take the K nearest points by geodesic distance,
  ///  2. weight each by 1 / max(d, epsilon)^p,
  ///  3. normalize the weights to sum to one,
  ///  4. return the weighted sum of their values.
  /// With p > 0, any neighbors within epsilon_km short-circuit to the mean of
  /// those coincident values.
  double interpolate(const geo::GeoPoint& query, const KnnParams& params) const;

 private:
  struct Bucket {
    int row = 0;
    int col = 0;
    std::vector<std::size_t> members;  // ascending canonical index
  };

  double lower_bound_km(const geo::GeoPoint& q, const Bucket& b) const;

  std::vector<ValuedPoint> points_;
  std::vector<Bucket> buckets_;
  double bucket_deg_ = 1.0;
};

/// Convenience wrapper building a throwaway index. Throws empty-dataset-error
/// on no points.
double knn_interpolate(std::span<const ValuedPoint> points, const geo::GeoPoint& query,
                       const KnnParams& params);

struct GridStats {
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Mean and population standard deviation; exactly zero spread for identical values.
GridStats compute_stats(std::span<const double> values);

struct Grid {
  geo::GridSpec spec;
  std::vector<double> values;  // row-major, north row first (matches geo::cell_centers)
  GridStats stats;
};

Grid rasterize(const KnnIndex& index, const geo::GridSpec& spec, const KnnParams& params);
Grid rasterize(std::span<const ValuedPoint> points, const geo::GridSpec& spec,
               const KnnParams& params);

struct SweepRow {
  std::size_t k;
  double p;
  double mean;
  double std;
};

/// One rasterization per (k, p) pair, k-major.
std::vector<SweepRow> sweep(std::span<const ValuedPoint> points, const geo::GridSpec& spec,
                            std::span<const std::size_t> k_list, std::span<const double> p_list,
                            double epsilon_km = 1e-6);

inline const std::vector<std::size_t> kDefaultSweepK = {10, 200, 1000, KnnParams::kAll};
inline const std::vector<double> kDefaultSweepP = {1.0, 0.2, 0.0};

// Outputs. Metadata entries are written verbatim as `key = value` lines.
using Metadata = std::map<std::string, std::string>;

void write_grid_csv(const std::filesystem::path& path, const Grid& grid);
void write_ascii_grid(const std::filesystem::path& path, const Grid& grid);
/// 8-bit binary PGM scaled linearly from the grid minimum (0) to maximum (255);
/// the scaling and `meta` go to `sidecar`.
void write_pgm(const std::filesystem::path& path, const std::filesystem::path& sidecar,
               const Grid& grid, const Metadata& meta);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);

}  // namespace co2fuse::interpolate
