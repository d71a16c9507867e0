#include "co2fuse/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <thread>
#include <tuple>

#include "co2fuse/error.hpp"
#include "csv.hpp"

namespace co2fuse::interpolate {

void validate(const KnnParams& params) {
  if (params.k == 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (!(params.p >= 0.0) || !std::isfinite(params.p)) {
    throw Error(ErrorKind::InvalidArgument, "p must be >= 0");
  }
  if (!(params.epsilon_km > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
}

std::size_t parse_k(const std::string& text) {
  if (text == "all" || text == "ALL" || text == "inf") return KnnParams::kAll;
  const auto v = csv::parse_int(text);
  if (!v || *v < 1) throw Error(ErrorKind::InvalidArgument, "k must be 'all' or >= 1: " + text);
  return static_cast<std::size_t>(*v);
}

std::string format_k(std::size_t k) {
  return k == KnnParams::kAll ? std::string("all") : std::to_string(k);
}

KnnIndex::KnnIndex(std::vector<ValuedPoint> points, double bucket_deg) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end(), [](const ValuedPoint& a, const ValuedPoint& b) {
    return std::tie(a.location.latitude, a.location.longitude, a.value) <
           std::tie(b.location.latitude, b.location.longitude, b.value);
  });
  for (const auto& p : points_) {
    if (!std::isfinite(p.value)) throw Error(ErrorKind::InvalidArgument, "non-finite point value");
  }
  if (points_.empty()) return;

  if (bucket_deg <= 0.0) {
    double s = 90.0, n = -90.0, w = 180.0, e = -180.0;
    for (const auto& p : points_) {
      s = std::min(s, p.location.latitude);
      n = std::max(n, p.location.latitude);
      w = std::min(w, p.location.longitude);
      e = std::max(e, p.location.longitude);
    }
    const double area = std::max(n - s, 0.01) * std::max(e - w, 0.01);
    bucket_deg = std::sqrt(area * 16.0 / static_cast<double>(points_.size()));
    bucket_deg = std::clamp(bucket_deg, 0.01, 10.0);
  }
  bucket_deg_ = bucket_deg;

  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& loc = points_[i].location;
    const int row = static_cast<int>(std::floor((loc.latitude + 90.0) / bucket_deg_));
    const int col = static_cast<int>(std::floor((loc.longitude + 180.0) / bucket_deg_));
    cells[{row, col}].push_back(i);
  }
  buckets_.reserve(cells.size());
  for (auto& [key, members] : cells) {
    buckets_.push_back(Bucket{key.first, key.second, std::move(members)});
  }
}

// Haversine lower bound: hav(d) = hav(dlat) + cos(lat_q) cos(lat_p) hav(dlon), and
// every term is bounded below by its minimum over the bucket.
double KnnIndex::lower_bound_km(const geo::GeoPoint& q, const Bucket& b) const {
  const double lat0 = b.row * bucket_deg_ - 90.0;
  const double lat1 = lat0 + bucket_deg_;
  const double lon0 = b.col * bucket_deg_ - 180.0;
  const double lon1 = lon0 + bucket_deg_;

  const double dlat = std::max({0.0, lat0 - q.latitude, q.latitude - lat1});
  double dlon = 0.0;
  if (q.longitude < lon0 || q.longitude > lon1) {
    const auto wrap = [](double a) {
      a = std::abs(a);
      return std::min(a, 360.0 - a);
    };
    dlon = std::min(wrap(q.longitude - lon0), wrap(q.longitude - lon1));
  }
  const double cos_q = std::cos(geo::deg_to_rad(q.latitude));
  const double cos_min = std::max(
      0.0, std::min(std::cos(geo::deg_to_rad(std::clamp(lat0, -90.0, 90.0))),
                    std::cos(geo::deg_to_rad(std::clamp(lat1, -90.0, 90.0)))));
  const double s_lat = std::sin(geo::deg_to_rad(dlat) * 0.5);
  const double s_lon = std::sin(geo::deg_to_rad(dlon) * 0.5);
  const double h = s_lat * s_lat + std::max(0.0, cos_q) * cos_min * s_lon * s_lon;
  const double d = 2.0 * geo::kEarthRadiusKm * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
  // stay strictly below any distance computed for a member point
  return d * (1.0 - 1e-12) - 1e-9;
}

namespace {

struct NeighborOrder {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return std::tie(a.distance_km, a.index) < std::tie(b.distance_km, b.index);
  }
};

}  // namespace

std::vector<Neighbor> KnnIndex::nearest(const geo::GeoPoint& query, std::size_t k) const {
  std::vector<Neighbor> out;
  if (k == 0 || points_.empty()) return out;
  if (k >= points_.size()) {
    out.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      out.push_back(Neighbor{i, geo::geodesic_km(query, points_[i].location)});
    }
    std::sort(out.begin(), out.end(), NeighborOrder{});
    return out;
  }

  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(buckets_.size());
  for (std::size_t b = 0; b < buckets_.size(); ++b) {
    order.emplace_back(lower_bound_km(query, buckets_[b]), b);
  }
  std::sort(order.begin(), order.end());

  // max-heap on (distance, index) holding the best k so far
  std::priority_queue<Neighbor, std::vector<Neighbor>, NeighborOrder> heap;
  for (const auto& [bound, b] : order) {
    if (heap.size() == k && bound > heap.top().distance_km) break;
    for (std::size_t i : buckets_[b].members) {
      const Neighbor cand{i, geo::geodesic_km(query, points_[i].location)};
      if (heap.size() < k) {
        heap.push(cand);
      } else if (NeighborOrder{}(cand, heap.top())) {
        heap.pop();
        heap.push(cand);
      }
    }
  }
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double KnnIndex::interpolate(const geo::GeoPoint& query, const KnnParams& params) const {
  validate(params);
  if (points_.empty()) throw Error(ErrorKind::EmptyDataset, "no points to interpolate from");

  auto neighbors = nearest(query, params.k);
  // canonical accumulation order
  std::sort(neighbors.begin(), neighbors.end(),
            [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });

  double lo = points_[neighbors.front().index].value;
  double hi = lo;
  for (const auto& n : neighbors) {
    lo = std::min(lo, points_[n.index].value);
    hi = std::max(hi, points_[n.index].value);
  }

  if (params.p > 0.0) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (const auto& n : neighbors) {
      if (n.distance_km <= params.epsilon_km) {
        sum += points_[n.index].value;
        ++hits;
      }
    }
    if (hits > 0) return std::clamp(sum / static_cast<double>(hits), lo, hi);
  }

  std::vector<double> w(neighbors.size());
  double total = 0.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    w[i] = 1.0 / std::pow(std::max(neighbors[i].distance_km, params.epsilon_km), params.p);
    total += w[i];
  }
  double y = 0.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    y += (w[i] / total) * points_[neighbors[i].index].value;
  }
  return std::clamp(y, lo, hi);
}

double knn_interpolate(std::span<const ValuedPoint> points, const geo::GeoPoint& query,
                       const KnnParams& params) {
  if (points.empty()) throw Error(ErrorKind::EmptyDataset, "no points to interpolate from");
  return KnnIndex(std::vector<ValuedPoint>(points.begin(), points.end())).interpolate(query, params);
}

GridStats compute_stats(std::span<const double> values) {
  if (values.empty()) return {};
  // shifted by the first value so identical inputs give exactly zero spread
  const double ref = values.front();
  double shift_sum = 0.0;
  for (double v : values) shift_sum += v - ref;
  const double n = static_cast<double>(values.size());
  GridStats s;
  s.mean = ref + shift_sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

Grid rasterize(const KnnIndex& index, const geo::GridSpec& spec, const KnnParams& params) {
  validate(params);
  if (index.size() == 0) throw Error(ErrorKind::EmptyDataset, "no points to interpolate from");
  const auto centers = geo::cell_centers(spec);
  Grid grid{spec, std::vector<double>(centers.size()), {}};

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                      centers.size() / 64 + 1));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) grid.values[c] = index.interpolate(centers[c], params);
  };
  if (workers == 1) {
    work(0, centers.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (centers.size() + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(centers.size(), b + chunk);
      if (b < e) threads.emplace_back(work, b, e);
    }
    for (auto& th : threads) th.join();
  }
  grid.stats = compute_stats(grid.values);
  return grid;
}

Grid rasterize(std::span<const ValuedPoint> points, const geo::GridSpec& spec,
               const KnnParams& params) {
  if (points.empty()) throw Error(ErrorKind::EmptyDataset, "no points to interpolate from");
  return rasterize(KnnIndex(std::vector<ValuedPoint>(points.begin(), points.end())), spec, params);
}

std::vector<SweepRow> sweep(std::span<const ValuedPoint> points, const geo::GridSpec& spec,
                            std::span<const std::size_t> k_list, std::span<const double> p_list,
                            double epsilon_km) {
  if (k_list.empty() || p_list.empty()) {
    throw Error(ErrorKind::InvalidArgument, "sweep needs non-empty k and p lists");
  }
  if (points.empty()) throw Error(ErrorKind::EmptyDataset, "no points to interpolate from");
  const KnnIndex index(std::vector<ValuedPoint>(points.begin(), points.end()));
  std::vector<SweepRow> rows;
  for (std::size_t k : k_list) {
    for (double p : p_list) {
      const Grid g = rasterize(index, spec, KnnParams{k, p, epsilon_km});
      rows.push_back(SweepRow{k, p, g.stats.mean, g.stats.std});
    }
  }
  return rows;
}

// --- outputs -----------------------------------------------------------------

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

void write_grid_csv(const std::filesystem::path& path, const Grid& grid) {
  auto out = open_output(path);
  const auto centers = geo::cell_centers(grid.spec);
  out << "latitude_deg,longitude_deg,co2_ppm\n";
  for (std::size_t c = 0; c < centers.size(); ++c) {
    out << csv::format_double(centers[c].latitude) << ','
        << csv::format_double(centers[c].longitude) << ',' << csv::format_double(grid.values[c])
        << '\n';
  }
}

void write_ascii_grid(const std::filesystem::path& path, const Grid& grid) {
  auto out = open_output(path);
  const std::size_t rows = grid.spec.rows();
  const std::size_t cols = grid.spec.cols();
  out << "ncols " << cols << "\nnrows " << rows << "\nxllcorner "
      << csv::format_double(grid.spec.bbox.west) << "\nyllcorner "
      << csv::format_double(grid.spec.bbox.south) << "\ncellsize "
      << csv::format_double(grid.spec.resolution) << "\nNODATA_value -9999\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out << (c ? " " : "") << csv::format_double(grid.values[r * cols + c]);
    }
    out << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const std::filesystem::path& sidecar,
               const Grid& grid, const Metadata& meta) {
  const auto [lo_it, hi_it] = std::minmax_element(grid.values.begin(), grid.values.end());
  const double lo = grid.values.empty() ? 0.0 : *lo_it;
  const double hi = grid.values.empty() ? 0.0 : *hi_it;
  const double span = hi - lo;
  {
    auto out = open_output(path);
    out << "P5\n" << grid.spec.cols() << ' ' << grid.spec.rows() << "\n255\n";
    for (double v : grid.values) {
      const double scaled = span > 0.0 ? (v - lo) / span * 255.0 : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(scaled, 0.0, 255.0)))));
    }
  }
  auto out = open_output(sidecar);
  out << "# linear scaling: pixel = round((ppm - min_ppm) / (max_ppm - min_ppm) * 255)\n";
  out << "min_ppm = " << csv::format_double(lo) << '\n';
  out << "max_ppm = " << csv::format_double(hi) << '\n';
  out << "rows = " << grid.spec.rows() << "\ncols = " << grid.spec.cols() << '\n';
  out << "bbox = " << csv::format_double(grid.spec.bbox.south) << ','
      << csv::format_double(grid.spec.bbox.west) << ',' << csv::format_double(grid.spec.bbox.north)
      << ',' << csv::format_double(grid.spec.bbox.east) << '\n';
  out << "resolution_deg = " << csv::format_double(grid.spec.resolution) << '\n';
  out << "mean_ppm = " << csv::format_double(grid.stats.mean) << '\n';
  out << "std_ppm = " << csv::format_double(grid.stats.std) << '\n';
  for (const auto& [k, v] : meta) out << k << " = " << v << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
  auto out = open_output(path);
  out << "k,p,mean_ppm,std_ppm\n";
  for (const auto& r : rows) {
    out << format_k(r.k) << ',' << csv::format_double(r.p) << ',' << csv::format_double(r.mean)
        << ',' << csv::format_double(r.std) << '\n';
  }
}

}  // namespace co2fuse::interpolate
