#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynens/matrix.hpp"
#include "dynens/prediction.hpp"
#include "dynens/rng.hpp"

namespace dynens {

struct LabeledDataset;

/// Shape and training knobs of an MLP with ReLU hidden layers and a softmax
/// output.
struct NetConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 0;
  double dropout_prob = 0.0;
  double weight_init_scale = 0.1;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  double momentum = 0.0;

  /// input_dim, hidden..., num_classes
  std::vector<std::size_t> layer_dims() const;
  /// Throws InvalidConfiguration.
  void validate() const;
};

struct DenseLayer {
  Matrix weights;  ///< out x in
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct NetParams {
  std::vector<DenseLayer> layers;
  double dropout_prob = 0.0;

  std::size_t input_dim() const { return layers.front().weights.cols(); }
  std::size_t num_classes() const { return layers.back().weights.rows(); }
  std::vector<std::size_t> layer_dims() const;
  std::size_t parameter_count() const;

  /// Same shapes, all zeros.
  NetParams zeros_like() const;

  /// Flat views in layer order: weights then bias.
  void for_each_value(const auto& fn) {
    for (auto& layer : layers) {
      for (auto& w : layer.weights.data()) fn(w);
      for (auto& b : layer.bias) fn(b);
    }
  }

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

/// Weights i.i.d. uniform in [-scale, scale] from the config seed; biases 0.
NetParams init_params(const NetConfig& config);

enum class ForwardMode {
  kInference,
  kTrainDropout,
  kMcDropout,
};

/// Softmax probabilities for every input row. The dropout modes need an rng
/// and apply inverted dropout after each hidden activation.
PredictionMatrix forward(const NetParams& params, const Matrix& inputs,
                         ForwardMode mode = ForwardMode::kInference, Rng* rng = nullptr);

struct LossAndGrad {
  double loss = 0.0;
  NetParams grads;
};

/// Mean softmax cross-entropy over the batch and its exact gradient. A null
/// rng disables dropout.
LossAndGrad loss_and_grad(const NetParams& params, const Matrix& inputs,
                          std::span<const std::size_t> labels, Rng* dropout_rng = nullptr);

struct TrainState {
  NetParams params;
  NetParams velocity;
  std::size_t epoch = 0;
  double lr = 0.0;
  double momentum = 0.0;
  Rng rng;

  static TrainState start(const NetConfig& config, std::uint64_t rng_seed);
};

/// velocity <- momentum * velocity + grads; params <- params - lr * velocity.
/// Throws TrainingDiverged on a non-finite gradient or update, leaving
/// `state` untouched.
void sgd_step(TrainState& state, const NetParams& grads, double lr);

/// One pass over `data` in a freshly shuffled order with mini-batches of
/// `batch_size`. Returns the mean batch loss.
double train_epoch(TrainState& state, const LabeledDataset& data, std::size_t batch_size,
                   double lr);

/// Inference-mode accuracy with lowest-index tie-breaking.
double evaluate(const NetParams& params, const LabeledDataset& data);

/// Row-normalized mean of m stochastic dropout passes.
PredictionMatrix mc_dropout_predict(const NetParams& params, const Matrix& inputs, std::size_t m,
                                    std::uint64_t seed);

// Serialization: "TINYNET v1", layer dims, dropout_prob, then one block per
// layer (weight rows, then the bias line), every value with 17 digits.
void write_net(std::ostream& out, const NetParams& params);
NetParams read_net(std::istream& in);
void save_net(const std::string& path, const NetParams& params);
NetParams load_net(const std::string& path);

}  // namespace dynens
