#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "co2fuse/fusion.hpp"

namespace co2fuse::models {

/// Axis-aligned binary regression tree. Samples with x[feature] < threshold go left.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output

    friend bool operator==(const Node&, const Node&) = default;
  };

  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(const fusion::FeatureVector& x) const;
  int depth() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct GbtConfig {
  int max_depth = 6;
  double learning_rate = 0.1;
  int n_estimators = 100;
  double gamma = 0.0;  // minimum split gain
  std::uint64_t seed = 0;
};

struct GbtModel {
  GbtConfig config;
  double base_score = 0.0;
  std::vector<RegressionTree> trees;

  double predict(const fusion::FeatureVector& x) const;
};

struct GbtFit {
  GbtModel model;
  std::vector<double> train_mse;  // after round 0 (base score) and every tree
};

/// Squared-error gradient boosting: start at the label mean, then fit each tree
/// to the current residuals with exact greedy variance-reduction splits and add
/// it scaled by the learning rate. Throws empty-dataset-error on no samples and
/// invalid-argument on a bad config.
GbtFit train_gbt(std::span<const fusion::LabeledSample> train, const GbtConfig& cfg = {});

/// Single tree fit to arbitrary targets; exposed for tests.
RegressionTree fit_regression_tree(std::span<const fusion::FeatureVector> x,
                                   std::span<const double> target, int max_depth, double gamma);

}  // namespace co2fuse::models
