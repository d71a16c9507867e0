#pragma once

#include <random>
#include <string>
#include <vector>

#include "co2fuse/fusion.hpp"

namespace testing {

// Random samples with every feature non-constant and a smooth label
// depending on xco2, t2m and u10.
inline std::vector<co2fuse::fusion::LabeledSample> random_dataset(std::size_t n,
                                                                  std::uint64_t seed,
                                                                  int stations = 5) {
  using namespace co2fuse::fusion;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSample s;
    for (std::size_t j = 0; j < kFeatureCount; ++j) s.features[j] = u(rng);
    s.features[kXco2] = 410 + 5 * u(rng);
    s.features[kT2m] = 285 + 10 * u(rng);
    s.label = s.features[kXco2] + 0.3 * (s.features[kT2m] - 285) + 2 * s.features[kU10];
    s.station_id = "S" + std::to_string(i % static_cast<std::size_t>(stations));
    s.sounding_time = co2fuse::Timestamp{static_cast<std::int64_t>(1577836800 + i * 60)};
    out.push_back(s);
  }
  return out;
}

inline co2fuse::fusion::FeatureVector random_features(std::mt19937_64& rng) {
  using namespace co2fuse::fusion;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureVector v;
  for (auto& x : v) x = u(rng);
  v[kXco2] = 410 + 6 * u(rng);
  v[kT2m] = 285 + 12 * u(rng);
  return v;
}

}  // namespace testing
