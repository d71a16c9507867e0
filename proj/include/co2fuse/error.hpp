#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace co2fuse {

enum class ErrorKind {
  InvalidArgument,
  Io,
  Schema,
  CorruptInput,
  DuplicateKey,
  NoData,
  StaleWeather,
  EmptyDataset,
  DegenerateFeature,
  DegenerateFit,
  DegenerateBinning,
  TrainingDiverged,
  FeatureOrder,
  Format,
  UndefinedR2,
  InsufficientSamples,
  Usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for an error kind: 2 input/schema, 3 empty data, 64 usage, 1 otherwise.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace co2fuse
