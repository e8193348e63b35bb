#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "iil/common.hpp"
#include "iil/kernels.hpp"

namespace iil {

enum class OutputHead { linear, softmax };

std::string to_string(OutputHead head);
OutputHead output_head_from_string(const std::string& name);

struct TrainConfig {
  double learning_rate = 3e-3;
  std::size_t batch_size = 32;

  void validate() const;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> biases;   // out
};

inline constexpr double kDefaultLeakySlope = 0.01;

/// Fully connected network with Leaky ReLU on hidden layers.
///
/// Weights are initialised uniformly on [-1/sqrt(fan_in), +1/sqrt(fan_in)], so
/// each layer's nominal standard deviation is 1/sqrt(3 * fan_in). Biases start
/// at zero. The same seed always yields bit-identical parameters.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_sizes, OutputHead head, std::uint64_t seed,
      double leaky_slope = kDefaultLeakySlope);

  static double init_bound(std::size_t fan_in);
  static double init_stddev(std::size_t fan_in);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  OutputHead head() const { return head_; }
  double leaky_slope() const { return slope_; }

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> input) const;
  Matrix forward_batch(const Matrix& inputs) const;

  /// Order-sensitive FNV-1a digest over every parameter's bit pattern.
  std::uint64_t parameter_hash() const;

  bool operator==(const Mlp& other) const;

 private:
  friend class MlpTrainer;
  friend Mlp mlp_from_json(const nlohmann::json& doc);

  std::vector<std::size_t> sizes_;
  OutputHead head_ = OutputHead::linear;
  double slope_ = kDefaultLeakySlope;
  std::vector<DenseLayer> layers_;
};

/// Parameter-shaped gradient storage.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const Mlp& net);
};

/// Mean batch loss: mean squared error over every output (linear head) or
/// cross-entropy against the target distribution (softmax head).
double batch_loss(const Mlp& net, const Matrix& inputs, const Matrix& targets);

/// Backpropagation; returns the mean batch loss and fills `grads`.
double compute_gradients(const Mlp& net, const Matrix& inputs, const Matrix& targets, Gradients& grads);

/// One plain SGD step in place. Returns the pre-step mean batch loss.
double train_step(Mlp& net, const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg);

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

}  // namespace iil
