#include "co2fuse/models/linear.hpp"

#include <cmath>

#include "co2fuse/error.hpp"

namespace co2fuse::models {

LinearModel train_baseline(std::span<const fusion::LabeledSample> train) {
  if (train.size() < 2) {
    throw Error(ErrorKind::EmptyDataset, "baseline needs at least two training samples");
  }
  const double n = static_cast<double>(train.size());
  double mx = 0.0, my = 0.0;
  for (const auto& s : train) {
    mx += s.features[fusion::kXco2];
    my += s.label;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : train) {
    const double dx = s.features[fusion::kXco2] - mx;
    sxx += dx * dx;
    sxy += dx * (s.label - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::DegenerateFit, "xco2 is constant over the training set");
  LinearModel m;
  m.slope = sxy / sxx;
  m.intercept = my - m.slope * mx;
  if (!std::isfinite(m.slope) || !std::isfinite(m.intercept)) {
    throw Error(ErrorKind::DegenerateFit, "non-finite baseline coefficients");
  }
  return m;
}

}  // namespace co2fuse::models
