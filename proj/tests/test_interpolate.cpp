#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "co2fuse/interpolate.hpp"
#include "support.hpp"

using namespace co2fuse;
using namespace co2fuse::interpolate;
using geo::GeoPoint;

namespace {

// Brute-force oracle: full scan, sort, weight, normalize.
double naive(const std::vector<ValuedPoint>& pts, GeoPoint q, const KnnParams& prm) {
  std::vector<std::pair<double, ValuedPoint>> all;
  for (const auto& p : pts) all.emplace_back(geo::geodesic_km(q, p.location), p);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second.location.latitude, a.second.location.longitude,
                    a.second.value) < std::tie(b.first, b.second.location.latitude,
                                               b.second.location.longitude, b.second.value);
  });
  const std::size_t k = std::min(prm.k, all.size());
  if (prm.p > 0) {
    double s = 0;
    int n = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (all[i].first <= prm.epsilon_km) s += all[i].second.value, ++n;
    }
    if (n) return s / n;
  }
  double wsum = 0, ysum = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = 1.0 / std::pow(std::max(all[i].first, prm.epsilon_km), prm.p);
    wsum += w;
    ysum += w * all[i].second.value;
  }
  return ysum / wsum;
}

std::vector<ValuedPoint> random_points(std::mt19937_64& rng, std::size_t n, double s, double w,
                                       double span) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ValuedPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({{s + span * u(rng), w + span * u(rng)}, 400 + 20 * u(rng)});
  }
  return pts;
}

// Point at a given eastward distance from the origin along the equator.
GeoPoint east_km(double km) { return {0.0, km / (geo::kEarthRadiusKm * geo::kPi / 180.0)}; }

}  // namespace

TEST_CASE("hand value: d = {1, 2} km, values {10, 20}, k 2, p 1") {
  const std::vector<ValuedPoint> pts = {{east_km(1), 10.0}, {east_km(-2), 20.0}};
  const double y = knn_interpolate(pts, {0, 0}, KnnParams{2, 1.0});
  CHECK(std::abs(y - 40.0 / 3.0) < 1e-9);
}

TEST_CASE("k = 1 returns the nearest value exactly") {
  std::mt19937_64 rng(41);
  const auto pts = random_points(rng, 300, 40, 0, 10);
  const KnnIndex idx(pts);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const GeoPoint q{40 + 10 * u(rng), 10 * u(rng)};
    const auto best = std::min_element(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
      return geo::geodesic_km(q, a.location) < geo::geodesic_km(q, b.location);
    });
    CHECK(idx.interpolate(q, KnnParams{1, 1.0}) == best->value);
    CHECK(idx.interpolate(q, KnnParams{1, 0.0}) == best->value);
  }
}

TEST_CASE("p = 0 with all points is the arithmetic mean") {
  std::mt19937_64 rng(42);
  const auto pts = random_points(rng, 257, -10, -10, 20);
  double mean = 0;
  for (const auto& p : pts) mean += p.value;
  mean /= pts.size();
  CHECK(knn_interpolate(pts, {3, 3}, KnnParams{KnnParams::kAll, 0.0}) ==
        doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("indexed search matches the naive oracle") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> npts(1, 500);
  std::uniform_real_distribution<double> u(0, 1);
  for (int inst = 0; inst < 200; ++inst) {
    const double span = inst % 3 == 0 ? 0.5 : 20.0;
    const auto pts = random_points(rng, static_cast<std::size_t>(npts(rng)), -30 + 60 * u(rng),
                                   -60 + 100 * u(rng), span);
    const std::size_t k = inst % 10 == 0 ? KnnParams::kAll : 1 + rng() % 40;
    const double p = std::vector<double>{0.0, 0.05, 0.2, 1.0, 2.0, 3.5}[rng() % 6];
    const KnnIndex idx(pts);
    for (int q = 0; q < 10; ++q) {
      const GeoPoint g{pts[0].location.latitude + span * (u(rng) - 0.3),
                       pts[0].location.longitude + span * (u(rng) - 0.3)};
      const double want = naive(pts, g, KnnParams{k, p});
      const double got = idx.interpolate(g, KnnParams{k, p});
      CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
    }
  }
}

TEST_CASE("nearest() agrees with a sorted full scan") {
  std::mt19937_64 rng(44);
  const auto pts = random_points(rng, 400, 50, 5, 4);
  const KnnIndex idx(pts);
  const GeoPoint q{52, 7};
  const auto near = idx.nearest(q, 25);
  REQUIRE(near.size() == 25);
  std::vector<double> d;
  for (const auto& p : pts) d.push_back(geo::geodesic_km(q, p.location));
  std::sort(d.begin(), d.end());
  for (std::size_t i = 0; i < near.size(); ++i) CHECK(near[i].distance_km == d[i]);
  CHECK(idx.nearest(q, 1000).size() == 400);
}

TEST_CASE("results are within the neighbor range") {
  std::mt19937_64 rng(45);
  const auto pts = random_points(rng, 200, 0, 0, 5);
  const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) {
    return a.value < b.value;
  });
  const KnnIndex idx(pts);
  std::uniform_real_distribution<double> u(-1, 6);
  for (int i = 0; i < 300; ++i) {
    const double y = idx.interpolate({u(rng), u(rng)}, KnnParams{1 + rng() % 50, 0.5 * (rng() % 5)});
    CHECK(y >= lo->value);
    CHECK(y <= hi->value);
  }
}

TEST_CASE("querying a measured location returns its value when p > 0") {
  std::mt19937_64 rng(46);
  const auto pts = random_points(rng, 100, 10, 10, 2);
  const KnnIndex idx(pts);
  for (const auto& p : pts) CHECK(idx.interpolate(p.location, KnnParams{10, 0.05}) == p.value);

  // coincident points average
  const std::vector<ValuedPoint> twin = {{{1, 1}, 10}, {{1, 1}, 20}, {{1.5, 1}, 100}};
  CHECK(knn_interpolate(twin, {1, 1}, KnnParams{3, 1.0}) == 15.0);
}

TEST_CASE("shuffling the input never changes the output") {
  std::mt19937_64 rng(47);
  auto pts = random_points(rng, 300, 45, 0, 10);
  // exact duplicates and equidistant pairs exercise the tie rules
  pts.push_back(pts[0]);
  pts.push_back({{pts[1].location.latitude, pts[1].location.longitude}, 401.0});
  const auto spec = geo::make_grid_spec(geo::make_bbox(45, 0, 55, 10), 0.5);
  for (const KnnParams prm : {KnnParams{7, 1.0}, KnnParams{50, 0.2}, KnnParams{KnnParams::kAll, 0.0}}) {
    const auto a = rasterize(pts, spec, prm);
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto b = rasterize(shuffled, spec, prm);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("rasterize") {
  const auto spec = geo::make_grid_spec(geo::make_bbox(0, 0, 10, 10), 1.0);
  const std::vector<ValuedPoint> one = {{{3, 3}, 412.0}};
  const auto g1 = rasterize(one, spec, KnnParams{});
  CHECK(g1.values.size() == 100);
  for (double v : g1.values) CHECK(v == 412.0);
  CHECK(g1.stats.std == 0.0);

  std::mt19937_64 rng(48);
  const auto pts = random_points(rng, 100, 0, 0, 10);
  const auto all0 = rasterize(pts, spec, KnnParams{KnnParams::kAll, 0.0});
  CHECK(all0.stats.std == 0.0);
  for (double v : all0.values) CHECK(v == all0.values[0]);

  const auto g5 = rasterize(pts, spec, KnnParams{5, 1.0});
  const auto centers = geo::cell_centers(spec);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double want = naive(pts, centers[c], KnnParams{5, 1.0});
    CHECK(std::abs(g5.values[c] - want) <= 1e-9 * want);
  }
  const auto st = compute_stats(g5.values);
  CHECK(st.mean == g5.stats.mean);
  CHECK(st.std == g5.stats.std);
}

TEST_CASE("grid statistics") {
  const std::vector<double> v = {1, 2, 3, 4};
  const auto s = compute_stats(v);
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
  const std::vector<double> same(1000, 415.123456789);
  CHECK(compute_stats(same).std == 0.0);
}

TEST_CASE("sweep") {
  std::mt19937_64 rng(49);
  const auto pts = random_points(rng, 1500, 0, 0, 10);
  const auto spec = geo::make_grid_spec(geo::make_bbox(0, 0, 10, 10), 1.0);
  const auto rows = sweep(pts, spec, kDefaultSweepK, kDefaultSweepP);
  REQUIRE(rows.size() == 12);
  double lo = 1e9, hi = -1e9;
  for (const auto& p : pts) lo = std::min(lo, p.value), hi = std::max(hi, p.value);
  for (const auto& r : rows) {
    CHECK(r.mean >= lo);
    CHECK(r.mean <= hi);
  }
  CHECK(rows[0].k == 10);
  CHECK(rows[0].p == 1.0);
  CHECK(rows[11].k == KnnParams::kAll);
  CHECK(rows[11].std == 0.0);

  const std::vector<std::size_t> all = {KnnParams::kAll};
  const std::vector<double> zero = {0.0};
  CHECK(sweep(pts, spec, all, zero)[0].std == 0.0);
  CHECK_THROWS_KIND(sweep(pts, spec, std::vector<std::size_t>{}, zero), ErrorKind::InvalidArgument);
}

TEST_CASE("parameter validation and parsing") {
  const std::vector<ValuedPoint> pts = {{{0, 0}, 1.0}};
  CHECK_THROWS_KIND(knn_interpolate({}, {0, 0}, KnnParams{}), ErrorKind::EmptyDataset);
  CHECK_THROWS_KIND(knn_interpolate(pts, {0, 0}, KnnParams{0, 1.0}), ErrorKind::InvalidArgument);
  CHECK_THROWS_KIND(knn_interpolate(pts, {0, 0}, KnnParams{1, -1.0}), ErrorKind::InvalidArgument);
  CHECK(parse_k("all") == KnnParams::kAll);
  CHECK(parse_k("200") == 200);
  CHECK(format_k(KnnParams::kAll) == "all");
  CHECK_THROWS_KIND(parse_k("0"), ErrorKind::InvalidArgument);
  CHECK_THROWS_KIND(parse_k("x"), ErrorKind::InvalidArgument);
  // k larger than the point count is capped
  CHECK(knn_interpolate(pts, {5, 5}, KnnParams{1000, 1.0}) == 1.0);
}

TEST_CASE("grid writers") {
  testing::TempDir dir("grid");
  const auto spec = geo::make_grid_spec(geo::make_bbox(0, 0, 2, 3), 1.0);
  Grid g{spec, {1, 2, 3, 4, 5, 6}, {}};
  g.stats = compute_stats(g.values);
  write_grid_csv(dir / "g.csv", g);
  write_ascii_grid(dir / "g.asc", g);
  write_pgm(dir / "g.pgm", dir / "g.pgm.meta", g, {{"k", "200"}});

  CHECK(testing::slurp(dir / "g.csv") ==
        "latitude_deg,longitude_deg,co2_ppm\n1.5,0.5,1\n1.5,1.5,2\n1.5,2.5,3\n0.5,0.5,4\n0.5,1.5,5\n"
        "0.5,2.5,6\n");
  CHECK(testing::slurp(dir / "g.asc") ==
        "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 2 3\n4 5 6\n");
  const std::string pgm = testing::slurp(dir / "g.pgm");
  CHECK(pgm.substr(0, 11) == "P5\n3 2\n255\n");
  REQUIRE(pgm.size() == 17);
  CHECK(static_cast<unsigned char>(pgm[11]) == 0);
  CHECK(static_cast<unsigned char>(pgm[13]) == 102);
  CHECK(static_cast<unsigned char>(pgm[16]) == 255);
  const std::string meta = testing::slurp(dir / "g.pgm.meta");
  CHECK(meta.find("min_ppm = 1\n") != std::string::npos);
  CHECK(meta.find("max_ppm = 6\n") != std::string::npos);
  CHECK(meta.find("k = 200\n") != std::string::npos);

  const std::vector<SweepRow> rows = {{10, 1.0, 410.5, 1.25}, {KnnParams::kAll, 0.0, 410.0, 0.0}};
  write_sweep_csv(dir / "s.csv", rows);
  CHECK(testing::slurp(dir / "s.csv") == "k,p,mean_ppm,std_ppm\n10,1,410.5,1.25\nall,0,410,0\n");
}
