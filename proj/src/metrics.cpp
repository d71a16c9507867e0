#include "co2fuse/metrics.hpp"

#include <cmath>
#include <string>

#include "co2fuse/error.hpp"

namespace co2fuse::metrics {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty() || y.size() != yhat.size()) {
    throw Error(ErrorKind::InvalidArgument, "metric inputs must be non-empty and equal length (" +
                                                std::to_string(y.size()) + " vs " +
                                                std::to_string(yhat.size()) + ")");
  }
}

double sum_squared_error(std::span<const double> y, std::span<const double> yhat) {
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - yhat[i];
    sse += e * e;
  }
  return sse;
}

}  // namespace

double mean_squared_error(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  return sum_squared_error(y, yhat) / static_cast<double>(y.size());
}

double root_mean_squared_error(std::span<const double> y, std::span<const double> yhat) {
  return std::sqrt(mean_squared_error(y, yhat));
}

EvalReport evaluate(std::span<const double> y, std::span<const double> yhat,
                    std::size_t p_features) {
  check_lengths(y, yhat);
  const std::size_t n = y.size();
  if (n <= p_features + 1) {
    throw Error(ErrorKind::InsufficientSamples,
                "adjusted R^2 needs n > p + 1 (n=" + std::to_string(n) +
                    ", p=" + std::to_string(p_features) + ")");
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  if (!(sst > 0.0)) throw Error(ErrorKind::UndefinedR2, "observed values are constant");

  const double sse = sum_squared_error(y, yhat);
  EvalReport report;
  report.n = n;
  report.p_features = p_features;
  report.mse = sse / static_cast<double>(n);
  report.rmse = std::sqrt(report.mse);
  // single final division: exact inputs give the correctly rounded result
  const double scaled_sst = static_cast<double>(n - p_features - 1) * sst;
  report.adj_r2 = (scaled_sst - static_cast<double>(n - 1) * sse) / scaled_sst;
  return report;
}

}  // namespace co2fuse::metrics
