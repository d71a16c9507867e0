#include "co2fuse/error.hpp"

namespace co2fuse {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::Schema: return "schema-error";
    case ErrorKind::CorruptInput: return "corrupt-input-error";
    case ErrorKind::DuplicateKey: return "duplicate-key-error";
    case ErrorKind::NoData: return "no-data-error";
    case ErrorKind::StaleWeather: return "stale-weather-error";
    case ErrorKind::EmptyDataset: return "empty-dataset-error";
    case ErrorKind::DegenerateFeature: return "degenerate-feature-error";
    case ErrorKind::DegenerateFit: return "degenerate-fit-error";
    case ErrorKind::DegenerateBinning: return "degenerate-binning-error";
    case ErrorKind::TrainingDiverged: return "training-diverged-error";
    case ErrorKind::FeatureOrder: return "feature-order-error";
    case ErrorKind::Format: return "format-error";
    case ErrorKind::UndefinedR2: return "undefined-r2-error";
    case ErrorKind::InsufficientSamples: return "insufficient-samples-error";
    case ErrorKind::Usage: return "usage-error";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
    case ErrorKind::Schema:
    case ErrorKind::CorruptInput:
    case ErrorKind::DuplicateKey:
    case ErrorKind::Format:
    case ErrorKind::FeatureOrder:
      return 2;
    case ErrorKind::EmptyDataset:
    case ErrorKind::NoData:
      return 3;
    case ErrorKind::Usage:
      return 64;
    default:
      return 1;
  }
}

}  // namespace co2fuse
