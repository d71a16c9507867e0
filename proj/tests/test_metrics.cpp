#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "co2fuse/metrics.hpp"
#include "support.hpp"

using namespace co2fuse;
using namespace co2fuse::metrics;

TEST_CASE("perfect prediction") {
  const std::vector<double> y = {1, 2, 3, 4, 5};
  const auto r = evaluate(y, y, 1);
  CHECK(r.mse == 0.0);
  CHECK(r.rmse == 0.0);
  CHECK(r.adj_r2 == 1.0);
}

TEST_CASE("hand case: SSE 1, SST 5, n 4, p 1") {
  const std::vector<double> y = {1, 2, 3, 4}, yhat = {1, 2, 3, 5};
  const auto r = evaluate(y, yhat, 1);
  CHECK(r.n == 4);
  CHECK(r.p_features == 1);
  CHECK(r.mse == 0.25);
  CHECK(r.rmse == 0.5);
  CHECK(r.adj_r2 == 0.7);
}

TEST_CASE("rmse squared equals mse on random vectors") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(410, 5);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> y(20 + t % 30), yhat(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = g(rng);
      yhat[i] = g(rng);
    }
    const auto r = evaluate(y, yhat, 3);
    CHECK(std::abs(r.rmse * r.rmse - r.mse) <= 1e-12 * r.mse);
    CHECK(r.adj_r2 <= 1.0);
    CHECK(mean_squared_error(y, yhat) == r.mse);
    CHECK(root_mean_squared_error(y, yhat) == r.rmse);
  }
}

TEST_CASE("shift invariance of mse and rmse") {
  const std::vector<double> y = {1, 2, 3, 4, 6}, yhat = {1.5, 2, 2.5, 4, 5};
  std::vector<double> ys = y, yhats = yhat;
  for (auto& v : ys) v += 1024.0;
  for (auto& v : yhats) v += 1024.0;
  CHECK(mean_squared_error(y, yhat) == mean_squared_error(ys, yhats));
  CHECK(root_mean_squared_error(y, yhat) == root_mean_squared_error(ys, yhats));
}

TEST_CASE("adjusted R2 decreases as p grows") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> y(40), yhat(40);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = g(rng);
    yhat[i] = y[i] + 0.5 * g(rng);
  }
  double prev = evaluate(y, yhat, 1).adj_r2;
  for (std::size_t p = 2; p < 30; ++p) {
    const double cur = evaluate(y, yhat, p).adj_r2;
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("metric errors") {
  const std::vector<double> a = {1, 2, 3}, b = {1, 2};
  CHECK_THROWS_KIND(evaluate(a, b, 1), ErrorKind::InvalidArgument);
  CHECK_THROWS_KIND(evaluate(std::vector<double>{}, std::vector<double>{}, 1),
                    ErrorKind::InvalidArgument);
  const std::vector<double> flat = {2, 2, 2, 2};
  const std::vector<double> guess = {1, 2, 3, 4};
  CHECK_THROWS_KIND(evaluate(flat, guess, 1), ErrorKind::UndefinedR2);
  CHECK_THROWS_KIND(evaluate(a, a, 2), ErrorKind::InsufficientSamples);
}

TEST_CASE("published table rows are self-consistent") {
  struct Row {
    double rmse, mse;
  };
  // (RMSE, MSE) pairs of the four models as printed
  const Row rows[] = {{6.22, 38.7}, {5.14, 26.4}, {4.29, 18.4}, {3.92, 15.3}};
  for (const auto& r : rows) CHECK(std::abs(r.mse - r.rmse * r.rmse) <= 0.15);
}
