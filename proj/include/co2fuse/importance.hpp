#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "co2fuse/fusion.hpp"

namespace co2fuse::importance {

using Predictor = std::function<double(const fusion::FeatureVector&)>;

enum class Method { Shapley, Permutation };
std::string_view to_string(Method m);

struct FeatureScore {
  std::size_t feature;  // canonical index
  double value;         // ppm
  std::size_t rank;     // 1 = most important
};

struct AttributionReport {
  Method method = Method::Shapley;
  double baseline = 0.0;              // f(background mean), or mean prediction for permutation
  std::vector<FeatureScore> ranking;  // descending by value, ties by feature index
  std::size_t rows_explained = 0;
};

/// Exact Shapley values of one row over all 2^14 coalitions. Features outside
/// a coalition take the value in `reference`.
fusion::FeatureVector shapley_values(const Predictor& f, const fusion::FeatureVector& x,
                                     const fusion::FeatureVector& reference);

inline constexpr std::size_t kDefaultShapleyRows = 256;

/// Mean |phi| per feature over at most `max_rows` rows drawn from `rows` with
/// `seed`. Absent features are imputed with the background mean. Throws
/// invalid-argument on empty background or rows.
AttributionReport shapley_attribution(const Predictor& f, std::span<const fusion::FeatureVector> rows,
                                      std::span<const fusion::FeatureVector> background,
                                      std::uint64_t seed,
                                      std::size_t max_rows = kDefaultShapleyRows);

/// Mean RMSE increase over `repeats` seeded shuffles of each column. Throws
/// invalid-argument when repeats < 1 or the dataset is empty.
AttributionReport permutation_importance(const Predictor& f,
                                         std::span<const fusion::LabeledSample> dataset,
                                         int repeats, std::uint64_t seed);

/// Sorts by value and assigns ranks.
std::vector<FeatureScore> rank_scores(const fusion::FeatureVector& values);

/// CSV `feature,mean_abs_attribution_ppm,rank,method`, one row per rank.
void write_report_csv(const std::filesystem::path& path, const AttributionReport& report);
void write_report_csv(std::ostream& out, const AttributionReport& report);
/// Text bar chart, most important first.
std::string format_bars(const AttributionReport& report, std::size_t width = 40);

}  // namespace co2fuse::importance
