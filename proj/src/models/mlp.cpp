#include "co2fuse/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "co2fuse/error.hpp"

namespace co2fuse::models {

std::size_t param_count(std::size_t inputs, std::span<const std::size_t> hidden,
                        std::size_t outputs) {
  std::size_t total = 0;
  std::size_t fan_in = inputs;
  for (std::size_t width : hidden) {
    total += fan_in * width + width;
    fan_in = width;
  }
  return total + fan_in * outputs + outputs;
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += l.weights.size() + l.bias.size();
  return total;
}

MlpNetwork init_network(std::size_t inputs, std::span<const std::size_t> hidden,
                        std::uint64_t seed) {
  if (inputs == 0) throw Error(ErrorKind::InvalidArgument, "network needs at least one input");
  std::mt19937_64 rng(seed);
  MlpNetwork net;
  std::size_t fan_in = inputs;
  auto add_layer = [&](std::size_t width) {
    if (width == 0) throw Error(ErrorKind::InvalidArgument, "layer width must be positive");
    DenseLayer layer{fan_in, width, std::vector<double>(fan_in * width),
                     std::vector<double>(width, 0.0)};
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (double& w : layer.weights) w = dist(rng);
    net.layers.push_back(std::move(layer));
    fan_in = width;
  };
  for (std::size_t width : hidden) add_layer(width);
  add_layer(1);
  return net;
}

namespace {

// Scratch buffers for one forward/backward pass over a batch.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] = inputs, act[l + 1] = output of layer l
  std::vector<double> delta, delta_prev;

  void resize(const MlpNetwork& net, std::size_t rows) {
    act.resize(net.layers.size() + 1);
    act[0].resize(rows * net.input_size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      act[l + 1].resize(rows * net.layers[l].outputs);
    }
  }
};

void forward_batch(const MlpNetwork& net, std::size_t rows, Workspace& ws) {
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const double* in = ws.act[l].data();
    double* out = ws.act[l + 1].data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* a = in + r * layer.inputs;
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* w = layer.weights.data() + o * layer.inputs;
        double z = layer.bias[o];
        for (std::size_t i = 0; i < layer.inputs; ++i) z += w[i] * a[i];
        out[r * layer.outputs + o] = (l == last || z > 0.0) ? z : 0.0;
      }
    }
  }
}

void zero_like(const MlpNetwork& net, MlpNetwork& grads) {
  if (grads.layers.size() != net.layers.size()) grads.layers.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& g = grads.layers[l];
    g.inputs = net.layers[l].inputs;
    g.outputs = net.layers[l].outputs;
    g.weights.assign(net.layers[l].weights.size(), 0.0);
    g.bias.assign(net.layers[l].bias.size(), 0.0);
  }
}

// Expects ws.act[0] filled with `rows` inputs. Returns (regularized loss, data loss).
std::pair<double, double> backprop(const MlpNetwork& net, std::span<const double> targets,
                                   double lambda, Workspace& ws, MlpNetwork& grads) {
  const std::size_t rows = targets.size();
  forward_batch(net, rows, ws);
  zero_like(net, grads);

  const double* yhat = ws.act.back().data();
  double sse = 0.0;
  ws.delta.resize(rows);
  const double scale = 2.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double e = yhat[r] - targets[r];
    sse += e * e;
    ws.delta[r] = scale * e;
  }
  const double data_loss = sse / static_cast<double>(rows);

  double penalty = 0.0;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    auto& g = grads.layers[l];
    const double* a_prev = ws.act[l].data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* a = a_prev + r * layer.inputs;
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double d = ws.delta[r * layer.outputs + o];
        g.bias[o] += d;
        if (d == 0.0) continue;
        double* gw = g.weights.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) gw[i] += d * a[i];
      }
    }
    for (std::size_t k = 0; k < layer.weights.size(); ++k) {
      const double w = layer.weights[k];
      penalty += w * w;
      g.weights[k] += 2.0 * lambda * w;
    }
    if (l == 0) break;

    // propagate through W, then through the ReLU that produced a_prev
    ws.delta_prev.assign(rows * layer.inputs, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      double* dp = ws.delta_prev.data() + r * layer.inputs;
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double d = ws.delta[r * layer.outputs + o];
        if (d == 0.0) continue;
        const double* w = layer.weights.data() + o * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) dp[i] += d * w[i];
      }
      const double* a = a_prev + r * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        if (!(a[i] > 0.0)) dp[i] = 0.0;
      }
    }
    std::swap(ws.delta, ws.delta_prev);
  }
  return {data_loss + lambda * penalty, data_loss};
}

void check_batch(const MlpNetwork& net, const Batch& batch) {
  if (net.layers.empty() || net.output_size() != 1) {
    throw Error(ErrorKind::InvalidArgument, "network must have a single output");
  }
  if (batch.rows() == 0 || batch.inputs.size() != batch.rows() * net.input_size()) {
    throw Error(ErrorKind::InvalidArgument, "batch must be non-empty with rows x inputs values");
  }
}

}  // namespace

double MlpNetwork::forward(std::span<const double> input) const {
  std::vector<double> cur(input.begin(), input.end()), next;
  const std::size_t last = layers.size() - 1;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    next.assign(layer.outputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* w = layer.weights.data() + o * layer.inputs;
      double z = layer.bias[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) z += w[i] * cur[i];
      next[o] = (l == last || z > 0.0) ? z : 0.0;
    }
    cur.swap(next);
  }
  return cur[0];
}

LossAndGradients loss_and_gradients(const MlpNetwork& net, const Batch& batch, double l2_lambda) {
  check_batch(net, batch);
  Workspace ws;
  ws.resize(net, batch.rows());
  std::copy(batch.inputs.begin(), batch.inputs.end(), ws.act[0].begin());
  LossAndGradients out;
  const auto [loss, data_loss] = backprop(net, batch.targets, l2_lambda, ws, out.gradients);
  out.loss = loss;
  out.data_loss = data_loss;
  return out;
}

double MlpModel::predict(const fusion::FeatureVector& x) const {
  const auto z = fusion::standardize(x, norm);
  return network.forward(z) * label_std + label_mean;
}

MlpFit train_mlp(std::span<const fusion::LabeledSample> train, const MlpConfig& cfg) {
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "mlp training set is empty");
  if (cfg.batch_size == 0 || cfg.epochs < 0 || !(cfg.learning_rate > 0.0) ||
      !(cfg.l2_lambda >= 0.0) || !(cfg.momentum >= 0.0) || !(cfg.momentum < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid mlp config");
  }
  constexpr std::size_t kIn = fusion::kFeatureCount;
  const std::size_t n = train.size();

  MlpFit fit;
  MlpModel& model = fit.model;
  model.config = cfg;
  model.norm = fusion::fit_norm_stats(train);

  double mean = 0.0;
  for (const auto& s : train) mean += s.label;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const auto& s : train) ss += (s.label - mean) * (s.label - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  model.label_mean = mean;
  model.label_std = sd > 0.0 ? sd : 1.0;

  std::vector<double> x(n * kIn), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = fusion::standardize(train[i].features, model.norm);
    std::copy(z.begin(), z.end(), x.begin() + static_cast<std::ptrdiff_t>(i * kIn));
    y[i] = (train[i].label - model.label_mean) / model.label_std;
  }

  model.network = init_network(kIn, cfg.hidden, cfg.seed);
  MlpNetwork& net = model.network;
  MlpNetwork velocity, grads;
  zero_like(net, velocity);

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Workspace ws;
  std::vector<double> targets;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, n - start);
      ws.resize(net, rows);
      targets.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = order[start + r];
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(i * kIn), kIn,
                    ws.act[0].begin() + static_cast<std::ptrdiff_t>(r * kIn));
        targets[r] = y[i];
      }
      const double loss = backprop(net, targets, cfg.l2_lambda, ws, grads).first;
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::TrainingDiverged,
                    "non-finite loss in epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss * static_cast<double>(rows);

      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto update = [&](std::vector<double>& p, std::vector<double>& v,
                          const std::vector<double>& g) {
          for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = cfg.momentum * v[k] - cfg.learning_rate * g[k];
            p[k] += v[k];
          }
        };
        update(net.layers[l].weights, velocity.layers[l].weights, grads.layers[l].weights);
        update(net.layers[l].bias, velocity.layers[l].bias, grads.layers[l].bias);
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::TrainingDiverged,
                  "non-finite loss in epoch " + std::to_string(epoch + 1));
    }
    fit.epoch_loss.push_back(epoch_loss);
  }
  return fit;
}

}  // namespace co2fuse::models
