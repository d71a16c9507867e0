#include "co2fuse/models/catboost.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "co2fuse/error.hpp"

namespace co2fuse::models {

using fusion::FeatureVector;
using fusion::kFeatureCount;

std::size_t ObliviousTree::leaf_index(const FeatureVector& x) const {
  std::size_t leaf = 0;
  for (std::size_t d = 0; d < splits.size(); ++d) {
    if (x[splits[d].feature] > splits[d].border) leaf |= std::size_t{1} << d;
  }
  return leaf;
}

std::vector<double> CatModel::logits(const FeatureVector& x) const {
  const std::size_t k = bin_centers.size();
  std::vector<double> z(k, 0.0);
  for (const auto& t : trees) {
    const double* v = t.leaf_values.data() + t.leaf_index(x) * k;
    for (std::size_t c = 0; c < k; ++c) z[c] += v[c];
  }
  return z;
}

int CatModel::predict_class(const FeatureVector& x) const {
  const auto z = logits(x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double CatModel::predict(const FeatureVector& x) const {
  if (config.decode == CatDecode::Argmax) return bin_centers[predict_class(x)];
  auto z = logits(x);
  const double zmax = *std::max_element(z.begin(), z.end());
  double norm = 0.0, acc = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double e = std::exp(z[c] - zmax);
    norm += e;
    acc += e * bin_centers[c];
  }
  return acc / norm;
}

int label_class(const CatModel& model, double label) {
  const int k = static_cast<int>(model.bin_centers.size());
  const double lo = model.bin_edges.front();
  const double width = (model.bin_edges.back() - lo) / k;
  const double pos = std::floor((label - lo) / width);
  if (!(pos > 0.0)) return 0;
  return std::min(k - 1, static_cast<int>(pos));
}

namespace {

double newton_term(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? g * g / denom : 0.0;
}

void validate(const CatBoostConfig& cfg) {
  if (cfg.nbr_classes < 2 || cfg.max_depth < 1 || cfg.max_depth > 16 || cfg.iterations < 0 ||
      !(cfg.learning_rate > 0.0) || !(cfg.l2_leaf_reg >= 0.0) || cfg.border_count < 1 ||
      cfg.border_count > 65535) {
    throw Error(ErrorKind::InvalidArgument, "invalid category boosting config");
  }
}

std::vector<double> select_borders(std::vector<double> values, int border_count) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> borders;
  if (values.size() < 2) return borders;
  const auto midpoint = [](double a, double b) {
    double m = a + (b - a) * 0.5;
    return m < b ? m : a;
  };
  const std::size_t gaps = values.size() - 1;
  if (gaps <= static_cast<std::size_t>(border_count)) {
    for (std::size_t i = 0; i < gaps; ++i) borders.push_back(midpoint(values[i], values[i + 1]));
  } else {
    // borders spread evenly over the distinct values
    for (int i = 1; i <= border_count; ++i) {
      const std::size_t k = std::max<std::size_t>(
          1, static_cast<std::size_t>(i) * values.size() / static_cast<std::size_t>(border_count + 1));
      borders.push_back(midpoint(values[k - 1], values[k]));
    }
    borders.erase(std::unique(borders.begin(), borders.end()), borders.end());
  }
  return borders;
}

}  // namespace

CatModel train_catboost(std::span<const fusion::LabeledSample> train, const CatBoostConfig& cfg) {
  validate(cfg);
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "category boosting training set is empty");

  const std::size_t n = train.size();
  const std::size_t k = static_cast<std::size_t>(cfg.nbr_classes);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : train) {
    lo = std::min(lo, s.label);
    hi = std::max(hi, s.label);
  }
  if (!(hi > lo)) throw Error(ErrorKind::DegenerateBinning, "all training labels are equal");

  CatModel model;
  model.config = cfg;
  const double width = (hi - lo) / static_cast<double>(k);
  for (std::size_t c = 0; c <= k; ++c) model.bin_edges.push_back(lo + width * static_cast<double>(c));
  model.bin_edges.back() = hi;
  for (std::size_t c = 0; c < k; ++c) {
    model.bin_centers.push_back(lo + width * (static_cast<double>(c) + 0.5));
  }

  std::vector<int> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = label_class(model, train[i].label);

  // quantize each feature once
  std::array<std::vector<double>, kFeatureCount> borders;
  std::array<std::vector<std::uint16_t>, kFeatureCount> bins;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = train[i].features[j];
    borders[j] = select_borders(col, cfg.border_count);
    bins[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      bins[j][i] = static_cast<std::uint16_t>(
          std::lower_bound(borders[j].begin(), borders[j].end(), col[i]) - borders[j].begin());
    }
  }

  const double lambda = cfg.l2_leaf_reg;
  std::vector<double> logit(n * k, 0.0), grad(n * k), hess(n * k);
  std::vector<std::uint32_t> leaf(n);
  std::vector<double> hist_g, hist_h, tot_g, tot_h, cum_g, cum_h;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* z = &logit[i * k];
      const double zmax = *std::max_element(z, z + k);
      double norm = 0.0;
      for (std::size_t c = 0; c < k; ++c) norm += std::exp(z[c] - zmax);
      for (std::size_t c = 0; c < k; ++c) {
        const double p = std::exp(z[c] - zmax) / norm;
        grad[i * k + c] = p - (static_cast<int>(c) == cls[i] ? 1.0 : 0.0);
        hess[i * k + c] = p * (1.0 - p);
      }
    }

    ObliviousTree tree;
    std::fill(leaf.begin(), leaf.end(), 0u);
    for (int depth = 0; depth < cfg.max_depth; ++depth) {
      const std::size_t leaves = std::size_t{1} << depth;
      double best_score = -std::numeric_limits<double>::infinity();
      int best_feature = -1;
      std::size_t best_border = 0;

      for (std::size_t j = 0; j < kFeatureCount; ++j) {
        const std::size_t nb = borders[j].size();
        if (nb == 0) continue;
        const std::size_t stride = (nb + 1) * k;  // per leaf
        hist_g.assign(leaves * stride, 0.0);
        hist_h.assign(leaves * stride, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t base = leaf[i] * stride + bins[j][i] * k;
          for (std::size_t c = 0; c < k; ++c) {
            hist_g[base + c] += grad[i * k + c];
            hist_h[base + c] += hess[i * k + c];
          }
        }
        tot_g.assign(leaves * k, 0.0);
        tot_h.assign(leaves * k, 0.0);
        for (std::size_t l = 0; l < leaves; ++l) {
          for (std::size_t b = 0; b <= nb; ++b) {
            for (std::size_t c = 0; c < k; ++c) {
              tot_g[l * k + c] += hist_g[l * stride + b * k + c];
              tot_h[l * k + c] += hist_h[l * stride + b * k + c];
            }
          }
        }
        cum_g.assign(leaves * k, 0.0);
        cum_h.assign(leaves * k, 0.0);
        for (std::size_t b = 0; b < nb; ++b) {
          double score = 0.0;
          for (std::size_t l = 0; l < leaves; ++l) {
            for (std::size_t c = 0; c < k; ++c) {
              const std::size_t lc = l * k + c;
              cum_g[lc] += hist_g[l * stride + b * k + c];
              cum_h[lc] += hist_h[l * stride + b * k + c];
              const double gr = tot_g[lc] - cum_g[lc];
              const double hr = tot_h[lc] - cum_h[lc];
              score += newton_term(cum_g[lc], cum_h[lc], lambda) + newton_term(gr, hr, lambda);
            }
          }
          if (score > best_score) {
            best_score = score;
            best_feature = static_cast<int>(j);
            best_border = b;
          }
        }
      }
      if (best_feature < 0) break;  // every feature is constant

      tree.splits.push_back(
          ObliviousTree::Split{best_feature, borders[best_feature][best_border]});
      const auto& fb = bins[best_feature];
      for (std::size_t i = 0; i < n; ++i) {
        if (fb[i] > best_border) leaf[i] |= std::uint32_t{1} << depth;
      }
    }

    const std::size_t leaves = std::size_t{1} << tree.splits.size();
    std::vector<double> sg(leaves * k, 0.0), sh(leaves * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        sg[leaf[i] * k + c] += grad[i * k + c];
        sh[leaf[i] * k + c] += hess[i * k + c];
      }
    }
    tree.leaf_values.resize(leaves * k);
    for (std::size_t lc = 0; lc < leaves * k; ++lc) {
      const double denom = sh[lc] + lambda;
      tree.leaf_values[lc] = denom > 0.0 ? -cfg.learning_rate * sg[lc] / denom : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double* v = &tree.leaf_values[leaf[i] * k];
      for (std::size_t c = 0; c < k; ++c) logit[i * k + c] += v[c];
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace co2fuse::models
