#include "co2fuse/models/gbt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "co2fuse/error.hpp"

namespace co2fuse::models {

using fusion::FeatureVector;
using fusion::kFeatureCount;

double RegressionTree::predict(const FeatureVector& x) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature >= 0) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
      deepest = std::max(deepest, d[i] + 1);
    }
  }
  return deepest;
}

namespace {

using IndexList = std::vector<std::uint32_t>;
using SortedLists = std::array<IndexList, kFeatureCount>;

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> x, std::span<const double> target, int max_depth,
              double gamma)
      : x_(x), target_(target), max_depth_(max_depth), gamma_(gamma), goes_left_(x.size(), 0) {}

  RegressionTree build() {
    SortedLists lists;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      auto& l = lists[j];
      l.resize(x_.size());
      std::iota(l.begin(), l.end(), 0u);
      std::stable_sort(l.begin(), l.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x_[a][j] < x_[b][j]; });
    }
    tree_.nodes.clear();
    grow(lists, 0);
    return std::move(tree_);
  }

 private:
  struct BestSplit {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  int grow(SortedLists& lists, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const IndexList& any = lists[0];
    const double n = static_cast<double>(any.size());
    double sum = 0.0, sum_sq = 0.0;
    for (auto i : any) {
      sum += target_[i];
      sum_sq += target_[i] * target_[i];
    }
    tree_.nodes[id].value = sum / n;
    if (depth >= max_depth_ || any.size() < 2) return id;

    const BestSplit best = find_split(lists, sum, sum_sq);
    if (best.feature < 0) return id;

    for (auto i : lists[best.feature]) goes_left_[i] = x_[i][best.feature] < best.threshold;
    SortedLists left, right;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      left[j].reserve(lists[j].size());
      right[j].reserve(lists[j].size());
      for (auto i : lists[j]) (goes_left_[i] ? left[j] : right[j]).push_back(i);
      IndexList().swap(lists[j]);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Gain is the reduction in squared error: SL^2/nL + SR^2/nR - S^2/n.
  BestSplit find_split(const SortedLists& lists, double sum, double sum_sq) const {
    const std::size_t count = lists[0].size();
    const double parent = sum * sum / static_cast<double>(count);
    // rounding noise must not create splits on exactly-fit nodes
    const double min_gain = gamma_ + 1e-12 * sum_sq;
    BestSplit best;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const auto& l = lists[j];
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < count; ++k) {
        left_sum += target_[l[k]];
        const double a = x_[l[k]][j];
        const double b = x_[l[k + 1]][j];
        if (!(a < b)) continue;
        const double nl = static_cast<double>(k + 1);
        const double nr = static_cast<double>(count - k - 1);
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
        if (gain > min_gain && gain > best.gain) {
          double thr = a + (b - a) * 0.5;
          if (!(a < thr)) thr = b;
          best = BestSplit{gain, static_cast<int>(j), thr};
        }
      }
    }
    return best;
  }

  std::span<const FeatureVector> x_;
  std::span<const double> target_;
  int max_depth_;
  double gamma_;
  std::vector<char> goes_left_;
  RegressionTree tree_;
};

void validate(const GbtConfig& cfg) {
  if (cfg.max_depth < 0 || cfg.n_estimators < 0 || !(cfg.learning_rate > 0.0) ||
      !(cfg.learning_rate <= 1.0) || !(cfg.gamma >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "gbt config needs max_depth >= 0, n_estimators >= 0, 0 < learning_rate <= 1, "
                "gamma >= 0");
  }
}

double mean_sq(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s / static_cast<double>(r.size());
}

}  // namespace

RegressionTree fit_regression_tree(std::span<const FeatureVector> x,
                                   std::span<const double> target, int max_depth, double gamma) {
  if (x.empty() || x.size() != target.size()) {
    throw Error(ErrorKind::InvalidArgument, "tree fit needs matching non-empty inputs");
  }
  return TreeBuilder(x, target, max_depth, gamma).build();
}

double GbtModel::predict(const FeatureVector& x) const {
  double f = base_score;
  for (const auto& t : trees) f += config.learning_rate * t.predict(x);
  return f;
}

GbtFit train_gbt(std::span<const fusion::LabeledSample> train, const GbtConfig& cfg) {
  validate(cfg);
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "gbt training set is empty");

  const auto x = fusion::features_of(train);
  const auto y = fusion::labels_of(train);
  GbtFit fit;
  fit.model.config = cfg;
  fit.model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - fit.model.base_score;
  fit.train_mse.push_back(mean_sq(residual));

  fit.model.trees.reserve(static_cast<std::size_t>(cfg.n_estimators));
  for (int round = 0; round < cfg.n_estimators; ++round) {
    RegressionTree tree = fit_regression_tree(x, residual, cfg.max_depth, cfg.gamma);
    for (std::size_t i = 0; i < y.size(); ++i) {
      residual[i] -= cfg.learning_rate * tree.predict(x[i]);
    }
    fit.model.trees.push_back(std::move(tree));
    fit.train_mse.push_back(mean_sq(residual));
  }
  return fit;
}

}  // namespace co2fuse::models
