#pragma once

#include <cstddef>
#include <span>

namespace co2fuse::metrics {

struct EvalReport {
  std::size_t n = 0;
  std::size_t p_features = 0;
  double mse = 0.0;     // ppm^2
  double rmse = 0.0;    // ppm
  double adj_r2 = 0.0;
};

/// MSE = mean squared error, RMSE = sqrt(MSE) and
/// adjusted R^2 = 1 - (n-1)/(n-p-1) * SSE/SST.
///
/// Throws invalid-argument on empty or mismatched inputs,
/// insufficient-samples-error when n <= p + 1 and undefined-r2-error when y is
/// constant.
EvalReport evaluate(std::span<const double> y, std::span<const double> yhat,
                    std::size_t p_features);

double mean_squared_error(std::span<const double> y, std::span<const double> yhat);
double root_mean_squared_error(std::span<const double> y, std::span<const double> yhat);

}  // namespace co2fuse::metrics
