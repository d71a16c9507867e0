#pragma once

#include <span>

#include "co2fuse/fusion.hpp"

namespace co2fuse::models {

/// label ~ slope * xco2 + intercept.
struct LinearModel {
  double slope = 0.0;
  double intercept = 0.0;

  double predict(const fusion::FeatureVector& v) const {
    return slope * v[fusion::kXco2] + intercept;
  }
};

/// Ordinary least squares of label on the xco2 feature alone. Throws
/// empty-dataset-error on fewer than two samples and degenerate-fit-error when
/// xco2 is constant.
LinearModel train_baseline(std::span<const fusion::LabeledSample> train);

}  // namespace co2fuse::models
