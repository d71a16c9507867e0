#include "co2fuse/importance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "co2fuse/error.hpp"
#include "co2fuse/metrics.hpp"
#include "csv.hpp"

namespace co2fuse::importance {

using fusion::FeatureVector;
using fusion::kFeatureCount;

std::string_view to_string(Method m) {
  return m == Method::Shapley ? "shapley" : "permutation";
}

std::vector<FeatureScore> rank_scores(const FeatureVector& values) {
  std::vector<FeatureScore> out;
  for (std::size_t j = 0; j < kFeatureCount; ++j) out.push_back(FeatureScore{j, values[j], 0});
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureScore& a, const FeatureScore& b) { return a.value > b.value; });
  for (std::size_t r = 0; r < out.size(); ++r) out[r].rank = r + 1;
  return out;
}

namespace {

constexpr std::size_t kCoalitions = std::size_t{1} << kFeatureCount;

// weight[s] = s! (M - s - 1)! / M!
std::array<double, kFeatureCount> coalition_weights() {
  std::array<double, kFeatureCount> w{};
  const double m = static_cast<double>(kFeatureCount);
  for (std::size_t s = 0; s < kFeatureCount; ++s) {
    // 1 / (M * C(M-1, s))
    double c = 1.0;
    for (std::size_t i = 0; i < s; ++i) {
      c = c * static_cast<double>(kFeatureCount - 1 - i) / static_cast<double>(i + 1);
    }
    w[s] = 1.0 / (m * c);
  }
  return w;
}

}  // namespace

FeatureVector shapley_values(const Predictor& f, const FeatureVector& x,
                             const FeatureVector& reference) {
  static const auto weights = coalition_weights();
  std::vector<double> v(kCoalitions);
  FeatureVector z;
  for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) z[j] = (mask >> j & 1U) ? x[j] : reference[j];
    v[mask] = f(z);
  }
  FeatureVector phi{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    double acc = 0.0;
    for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
      if (mask & bit) continue;
      acc += weights[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | bit] - v[mask]);
    }
    phi[j] = acc;
  }
  return phi;
}

AttributionReport shapley_attribution(const Predictor& f, std::span<const FeatureVector> rows,
                                      std::span<const FeatureVector> background,
                                      std::uint64_t seed, std::size_t max_rows) {
  if (background.empty()) throw Error(ErrorKind::InvalidArgument, "shapley background is empty");
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "no rows to explain");
  if (max_rows == 0) throw Error(ErrorKind::InvalidArgument, "max_rows must be >= 1");

  FeatureVector mu{};
  for (const auto& b : background) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) mu[j] += b[j];
  }
  for (double& m : mu) m /= static_cast<double>(background.size());

  std::vector<std::size_t> pick(rows.size());
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  if (rows.size() > max_rows) {
    std::mt19937_64 rng(seed);
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(max_rows);
    std::sort(pick.begin(), pick.end());
  }

  FeatureVector total{};
  for (std::size_t i : pick) {
    const auto phi = shapley_values(f, rows[i], mu);
    for (std::size_t j = 0; j < kFeatureCount; ++j) total[j] += std::abs(phi[j]);
  }
  for (double& t : total) t /= static_cast<double>(pick.size());

  AttributionReport report;
  report.method = Method::Shapley;
  report.baseline = f(mu);
  report.ranking = rank_scores(total);
  report.rows_explained = pick.size();
  return report;
}

AttributionReport permutation_importance(const Predictor& f,
                                         std::span<const fusion::LabeledSample> dataset,
                                         int repeats, std::uint64_t seed) {
  if (repeats < 1) throw Error(ErrorKind::InvalidArgument, "repeats must be >= 1");
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "permutation dataset is empty");

  const std::size_t n = dataset.size();
  std::vector<FeatureVector> x = fusion::features_of(dataset);
  const std::vector<double> y = fusion::labels_of(dataset);

  std::vector<double> yhat(n);
  double mean_pred = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    yhat[i] = f(x[i]);
    mean_pred += yhat[i];
  }
  mean_pred /= static_cast<double>(n);
  const double base_rmse = metrics::root_mean_squared_error(y, yhat);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(n);
  FeatureVector increase{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double acc = 0.0;
    for (int r = 0; r < repeats; ++r) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < n; ++i) {
        FeatureVector z = x[i];
        z[j] = x[perm[i]][j];
        yhat[i] = f(z);
      }
      acc += metrics::root_mean_squared_error(y, yhat) - base_rmse;
    }
    increase[j] = acc / repeats;
  }

  AttributionReport report;
  report.method = Method::Permutation;
  report.baseline = mean_pred;
  report.ranking = rank_scores(increase);
  report.rows_explained = n;
  return report;
}

void write_report_csv(std::ostream& out, const AttributionReport& report) {
  out << "feature,mean_abs_attribution_ppm,rank,method\n";
  for (const auto& s : report.ranking) {
    out << fusion::kFeatureNames[s.feature] << ',' << csv::format_double(s.value) << ',' << s.rank
        << ',' << to_string(report.method) << '\n';
  }
}

void write_report_csv(const std::filesystem::path& path, const AttributionReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_report_csv(out, report);
}

std::string format_bars(const AttributionReport& report, std::size_t width) {
  double top = 0.0;
  for (const auto& s : report.ranking) top = std::max(top, s.value);
  std::ostringstream out;
  for (const auto& s : report.ranking) {
    const auto name = fusion::kFeatureNames[s.feature];
    out << name << std::string(20 > name.size() ? 20 - name.size() : 1, ' ');
    const std::size_t len =
        top > 0.0 ? static_cast<std::size_t>(std::lround(std::max(0.0, s.value) / top * width)) : 0;
    out << std::string(len, '#') << ' ' << csv::format_double(s.value) << '\n';
  }
  return out.str();
}

}  // namespace co2fuse::importance
