#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "co2fuse/models/gbt.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace co2fuse;
using namespace co2fuse::models;

TEST_CASE("constant labels predict the constant") {
  auto d = testing::random_dataset(100, 3);
  for (auto& s : d) s.label = 412.5;
  const auto fit = train_gbt(d);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) CHECK(fit.model.predict(testing::random_features(rng)) == 412.5);
  CHECK(fit.train_mse.front() == 0.0);
}

TEST_CASE("depth-1 boosting fits a step") {
  auto d = testing::random_dataset(400, 4);
  for (auto& s : d) s.label = s.features[0] < 0 ? 0.0 : 10.0;
  GbtConfig cfg;
  cfg.max_depth = 1;
  cfg.n_estimators = 100;
  const auto fit = train_gbt(d, cfg);
  double worst = 0;
  for (const auto& s : d) worst = std::max(worst, std::abs(fit.model.predict(s.features) - s.label));
  CHECK(worst < 0.1);
  CHECK(fit.model.trees.size() <= 100);
  for (const auto& t : fit.model.trees) CHECK(t.depth() <= 1);
}

TEST_CASE("training mse never increases across rounds") {
  for (std::uint64_t seed : {5, 6, 7}) {
    auto d = testing::random_dataset(300, seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 3);
    for (auto& s : d) s.label += g(rng);
    const auto fit = train_gbt(d);
    REQUIRE(fit.train_mse.size() == 101);
    for (std::size_t r = 1; r < fit.train_mse.size(); ++r) {
      CHECK(fit.train_mse[r] <= fit.train_mse[r - 1] * (1 + 1e-12));
    }
    for (const auto& t : fit.model.trees) CHECK(t.depth() <= 6);
  }
}

TEST_CASE("tiny learning rate stays at the base score") {
  const auto d = testing::random_dataset(200, 8);
  GbtConfig cfg;
  cfg.learning_rate = 1e-6;
  const auto fit = train_gbt(d, cfg);
  double mean = 0;
  for (const auto& s : d) mean += s.label;
  mean /= d.size();
  for (const auto& s : d) CHECK(std::abs(fit.model.predict(s.features) - mean) < 1e-3);
}

TEST_CASE("single tree matches an exhaustive stump search") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<fusion::FeatureVector> x(60);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (auto& v : x[i]) v = u(rng);
    y[i] = x[i][5] > 0.2 ? 3.0 + u(rng) * 0.1 : -1.0 + u(rng) * 0.1;
  }
  const auto tree = fit_regression_tree(x, y, 1, 0.0);

  // oracle: best single split by brute force over all features and midpoints
  double best_sse = 1e300;
  for (std::size_t f = 0; f < fusion::kFeatureCount; ++f) {
    std::vector<double> vals;
    for (const auto& r : x) vals.push_back(r[f]);
    std::sort(vals.begin(), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double thr = 0.5 * (vals[k] + vals[k + 1]);
      double sl = 0, sr = 0, nl = 0, nr = 0;
      for (std::size_t i = 0; i < x.size(); ++i) (x[i][f] < thr ? (sl += y[i], nl++) : (sr += y[i], nr++));
      if (nl == 0 || nr == 0) continue;
      double sse = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = x[i][f] < thr ? sl / nl : sr / nr;
        sse += (y[i] - m) * (y[i] - m);
      }
      best_sse = std::min(best_sse, sse);
    }
  }
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sse += (y[i] - tree.predict(x[i])) * (y[i] - tree.predict(x[i]));
  CHECK(sse == doctest::Approx(best_sse).epsilon(1e-9));
  CHECK(tree.nodes[0].feature == 5);
}

TEST_CASE("gbt errors and determinism") {
  CHECK_THROWS_KIND(train_gbt(std::vector<fusion::LabeledSample>{}), ErrorKind::EmptyDataset);
  const auto d = testing::random_dataset(150, 10);
  CHECK(train_gbt(d).model.trees == train_gbt(d).model.trees);
}
