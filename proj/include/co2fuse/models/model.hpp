#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "co2fuse/fusion.hpp"
#include "co2fuse/models/catboost.hpp"
#include "co2fuse/models/gbt.hpp"
#include "co2fuse/models/linear.hpp"
#include "co2fuse/models/mlp.hpp"

namespace co2fuse::models {

enum class ModelKind { Baseline, Gbt, CatBoost, Mlp };

std::string_view to_string(ModelKind kind);
/// Accepts baseline|gbt|catboost|mlp; throws usage-error otherwise.
ModelKind parse_model_kind(std::string_view text);

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelMagic = "CO2FUSE-MODEL";

struct TrainedModel {
  std::variant<LinearModel, GbtModel, CatModel, MlpModel> model;
  std::string fingerprint = fusion::feature_fingerprint();
  int format_version = kModelFormatVersion;

  ModelKind kind() const { return static_cast<ModelKind>(model.index()); }
};

/// Throws feature-order-error when the model's fingerprint differs from the
/// canonical feature list.
double predict(const TrainedModel& model, const fusion::FeatureVector& v);
std::vector<double> predict_all(const TrainedModel& model,
                                std::span<const fusion::FeatureVector> rows);

/// Default p for adjusted R^2: 1 for the xco2-only baseline, 14 otherwise.
std::size_t default_p_features(ModelKind kind);

/// Text serialization. Every double is written with 17 significant digits so a
/// reload predicts bit-identically.
void save(const TrainedModel& model, std::ostream& out);
void save(const TrainedModel& model, const std::filesystem::path& path);
std::string to_text(const TrainedModel& model);

/// Throws format-error on bad magic, unsupported version or truncated/garbled content.
TrainedModel load(std::istream& in);
TrainedModel load(const std::filesystem::path& path);
TrainedModel from_text(const std::string& text);

}  // namespace co2fuse::models
