#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "co2fuse/fusion.hpp"

namespace co2fuse::models {

struct MlpConfig {
  std::vector<std::size_t> hidden = {64, 128, 64, 32};
  double learning_rate = 0.001;
  double l2_lambda = 1e-4;
  int epochs = 200;
  std::size_t batch_size = 32;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

/// Fully connected layer; weights are row-major (outputs x inputs).
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// ReLU after every layer except the last, which is linear.
struct MlpNetwork {
  std::vector<DenseLayer> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : layers.front().inputs; }
  std::size_t output_size() const { return layers.empty() ? 0 : layers.back().outputs; }
  std::size_t parameter_count() const;

  /// Scalar output for one input row of input_size() values.
  double forward(std::span<const double> input) const;

  friend bool operator==(const MlpNetwork&, const MlpNetwork&) = default;
};

/// Trainable parameters: sum over layers of (fan_in * fan_out + fan_out).
std::size_t param_count(std::size_t inputs, std::span<const std::size_t> hidden,
                        std::size_t outputs = 1);

/// He-normal weights (variance 2 / fan_in), zero biases.
MlpNetwork init_network(std::size_t inputs, std::span<const std::size_t> hidden,
                        std::uint64_t seed);

/// Row-major inputs (rows x input_size) with one target per row.
struct Batch {
  std::span<const double> inputs;
  std::span<const double> targets;

  std::size_t rows() const { return targets.size(); }
};

struct LossAndGradients {
  double loss = 0.0;         // mean squared error + lambda * sum of squared weights
  double data_loss = 0.0;    // mean squared error alone
  MlpNetwork gradients;      // same shapes as the network
};

/// Exact backpropagation of mean((y_hat - y)^2) + lambda * sum(w^2). Biases are
/// not penalized. Throws invalid-argument on an empty or misshaped batch.
LossAndGradients loss_and_gradients(const MlpNetwork& net, const Batch& batch, double l2_lambda);

struct MlpModel {
  MlpConfig config;
  fusion::NormStats norm;
  double label_mean = 0.0;
  double label_std = 1.0;
  MlpNetwork network;

  /// Standardizes with the embedded statistics, runs the network and maps the
  /// output back to ppm.
  double predict(const fusion::FeatureVector& x) const;
};

struct MlpFit {
  MlpModel model;
  std::vector<double> epoch_loss;  // mean regularized training loss per epoch
};

/// Mini-batch gradient descent with momentum on standardized features and
/// labels. Deterministic for a fixed seed. Throws training-diverged-error on a
/// non-finite loss, naming the epoch.
MlpFit train_mlp(std::span<const fusion::LabeledSample> train, const MlpConfig& cfg = {});

}  // namespace co2fuse::models
