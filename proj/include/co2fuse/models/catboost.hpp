#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "co2fuse/fusion.hpp"

namespace co2fuse::models {

enum class CatDecode {
  Argmax,       // center of the most probable bin
  Expectation,  // probability-weighted mean of bin centers
};

struct CatBoostConfig {
  int nbr_classes = 25;
  int max_depth = 6;
  double learning_rate = 0.1;
  int iterations = 100;
  double l2_leaf_reg = 3.0;
  int border_count = 254;  // candidate split borders per feature
  CatDecode decode = CatDecode::Argmax;
  std::uint64_t seed = 0;
};

/// Symmetric tree: every level tests the same (feature, border) pair, so a
/// sample's leaf index is the bit pattern of its comparisons. Each leaf holds
/// one value per class.
struct ObliviousTree {
  struct Split {
    int feature = 0;
    double border = 0.0;  // bit set when x[feature] > border

    friend bool operator==(const Split&, const Split&) = default;
  };

  std::vector<Split> splits;        // splits[d] sets bit d of the leaf index
  std::vector<double> leaf_values;  // (1 << splits.size()) * classes, leaf-major

  std::size_t leaf_index(const fusion::FeatureVector& x) const;

  friend bool operator==(const ObliviousTree&, const ObliviousTree&) = default;
};

struct CatModel {
  CatBoostConfig config;
  std::vector<double> bin_edges;    // classes + 1 equal-width edges over the label range
  std::vector<double> bin_centers;  // classes
  std::vector<ObliviousTree> trees;

  /// Raw per-class scores (softmax logits).
  std::vector<double> logits(const fusion::FeatureVector& x) const;
  int predict_class(const fusion::FeatureVector& x) const;
  double predict(const fusion::FeatureVector& x) const;
};

/// Equal-width bin index of `label` (the top edge belongs to the last bin).
int label_class(const CatModel& model, double label);

/// Discretizes labels into equal-width bins over [min, max] and boosts a
/// softmax classifier of oblivious trees with Newton leaf values
/// -G / (H + l2_leaf_reg). Throws degenerate-binning-error when all labels are
/// equal and empty-dataset-error on no samples.
CatModel train_catboost(std::span<const fusion::LabeledSample> train,
                        const CatBoostConfig& cfg = {});

}  // namespace co2fuse::models
