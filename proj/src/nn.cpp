#include "iil/nn.hpp"

#include <bit>
#include <cmath>

namespace iil {

std::string to_string(OutputHead head) { return head == OutputHead::softmax ? "softmax" : "linear"; }

OutputHead output_head_from_string(const std::string& name) {
  if (name == "softmax") return OutputHead::softmax;
  if (name == "linear") return OutputHead::linear;
  throw LoadError("unknown output head '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
}

double Mlp::init_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

double Mlp::init_stddev(std::size_t fan_in) { return 1.0 / std::sqrt(3.0 * static_cast<double>(fan_in)); }

Mlp::Mlp(std::vector<std::size_t> layer_sizes, OutputHead head, std::uint64_t seed, double leaky_slope)
    : sizes_(std::move(layer_sizes)), head_(head), slope_(leaky_slope) {
  if (sizes_.size() < 2) throw InvalidArchitecture("an MLP needs at least an input and an output layer");
  for (auto s : sizes_)
    if (s == 0) throw InvalidArchitecture("layer sizes must be positive");
  if (!(slope_ > 0.0 && slope_ < 1.0)) throw InvalidArchitecture("leaky slope must lie in (0, 1)");

  Rng rng(seed);
  layers_.reserve(sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes_[l];
    layer.out = sizes_[l + 1];
    const double bound = init_bound(layer.in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.weights.resize(layer.in * layer.out);
    for (double& w : layer.weights) w = dist(rng);
    layer.biases.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.biases.size();
  return n;
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  if (layers_.empty()) throw InvalidArchitecture("forward on an uninitialised network");
  if (inputs.cols != input_dim())
    throw ShapeError("input length " + std::to_string(inputs.cols) + " != " + std::to_string(input_dim()));
  Matrix act = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Matrix z(act.rows, layer.out);
    kernels::dense_forward(act, layer.weights, layer.biases, z);
    if (l + 1 < layers_.size()) kernels::leaky_relu(z, slope_);
    act = std::move(z);
  }
  if (head_ == OutputHead::softmax) kernels::softmax_rows(act);
  return act;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Matrix x(1, input.size());
  std::copy(input.begin(), input.end(), x.data.begin());
  return forward_batch(x).data;
}

std::uint64_t Mlp::parameter_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& l : layers_) {
    for (double w : l.weights) mix(w);
    for (double b : l.biases) mix(b);
  }
  return h;
}

bool Mlp::operator==(const Mlp& other) const {
  if (sizes_ != other.sizes_ || head_ != other.head_ || slope_ != other.slope_) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weights != other.layers_[l].weights) return false;
    if (layers_[l].biases != other.layers_[l].biases) return false;
  }
  return true;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.biases.emplace_back(l.biases.size(), 0.0);
  }
  return g;
}

namespace {

void check_batch(const Mlp& net, const Matrix& inputs, const Matrix& targets) {
  if (inputs.rows == 0) throw InvalidBatch("empty batch");
  if (inputs.cols != net.input_dim()) throw ShapeError("batch input width does not match the network");
  if (targets.rows != inputs.rows || targets.cols != net.output_dim())
    throw ShapeError("batch targets do not match the network output");
}

double loss_from_output(OutputHead head, const Matrix& out, const Matrix& targets) {
  const double n = static_cast<double>(out.rows);
  double total = 0.0;
  if (head == OutputHead::linear) {
    for (std::size_t k = 0; k < out.data.size(); ++k) {
      const double d = out.data[k] - targets.data[k];
      total += d * d;
    }
    return total / (n * static_cast<double>(out.cols));
  }
  for (std::size_t k = 0; k < out.data.size(); ++k)
    if (targets.data[k] != 0.0) total -= targets.data[k] * std::log(std::max(out.data[k], 1e-300));
  return total / n;
}

}  // namespace

double batch_loss(const Mlp& net, const Matrix& inputs, const Matrix& targets) {
  check_batch(net, inputs, targets);
  return loss_from_output(net.head(), net.forward_batch(inputs), targets);
}

double compute_gradients(const Mlp& net, const Matrix& inputs, const Matrix& targets, Gradients& grads) {
  check_batch(net, inputs, targets);
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();

  // activations[l] is the input to layer l; pre[l] the pre-activation of layer l.
  std::vector<Matrix> activations(depth + 1);
  std::vector<Matrix> pre(depth);
  activations[0] = inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix z(inputs.rows, layers[l].out);
    kernels::dense_forward(activations[l], layers[l].weights, layers[l].biases, z);
    pre[l] = z;
    if (l + 1 < depth) kernels::leaky_relu(z, net.leaky_slope());
    activations[l + 1] = std::move(z);
  }
  Matrix& out = activations[depth];
  if (net.head() == OutputHead::softmax) kernels::softmax_rows(out);
  const double loss = loss_from_output(net.head(), out, targets);

  const double n = static_cast<double>(inputs.rows);
  Matrix delta(out.rows, out.cols);
  if (net.head() == OutputHead::linear) {
    const double scale = 2.0 / (n * static_cast<double>(out.cols));
    for (std::size_t k = 0; k < delta.data.size(); ++k) delta.data[k] = scale * (out.data[k] - targets.data[k]);
  } else {
    // Softmax + cross-entropy with targets that need not sum to one.
    for (std::size_t r = 0; r < out.rows; ++r) {
      double tsum = 0.0;
      for (std::size_t c = 0; c < out.cols; ++c) tsum += targets(r, c);
      for (std::size_t c = 0; c < out.cols; ++c) delta(r, c) = (tsum * out(r, c) - targets(r, c)) / n;
    }
  }

  if (grads.weights.size() != depth) grads = Gradients::zeros_like(net);
  for (std::size_t l = depth; l-- > 0;) {
    kernels::dense_backward_params(delta, activations[l], grads.weights[l], grads.biases[l]);
    if (l == 0) break;
    Matrix dx(delta.rows, layers[l].in);
    kernels::dense_backward_input(delta, layers[l].weights, layers[l].in, dx);
    kernels::leaky_relu_backward(pre[l - 1], net.leaky_slope(), dx);
    delta = std::move(dx);
  }
  return loss;
}

class MlpTrainer {
 public:
  static void apply(Mlp& net, const Gradients& g, double lr) {
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
      auto& layer = net.layers_[l];
      for (std::size_t k = 0; k < layer.weights.size(); ++k) layer.weights[k] -= lr * g.weights[l][k];
      for (std::size_t k = 0; k < layer.biases.size(); ++k) layer.biases[k] -= lr * g.biases[l][k];
    }
  }
};

double train_step(Mlp& net, const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg) {
  cfg.validate();
  Gradients g = Gradients::zeros_like(net);
  const double loss = compute_gradients(net, inputs, targets, g);
  MlpTrainer::apply(net, g, cfg.learning_rate);
  return loss;
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json doc;
  doc["layer_sizes"] = net.layer_sizes();
  doc["output_head"] = to_string(net.head());
  doc["leaky_slope"] = net.leaky_slope();
  auto weights = nlohmann::json::array();
  auto biases = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    auto rows = nlohmann::json::array();
    for (std::size_t o = 0; o < l.out; ++o)
      rows.push_back(std::vector<double>(l.weights.begin() + static_cast<long>(o * l.in),
                                         l.weights.begin() + static_cast<long>((o + 1) * l.in)));
    weights.push_back(std::move(rows));
    biases.push_back(l.biases);
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  return doc;
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  try {
    Mlp net;
    net.sizes_ = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    net.head_ = output_head_from_string(doc.at("output_head").get<std::string>());
    net.slope_ = doc.at("leaky_slope").get<double>();
    if (net.sizes_.size() < 2) throw LoadError("network needs at least two layers");
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() + 1 != net.sizes_.size() || biases.size() + 1 != net.sizes_.size())
      throw LoadError("layer count does not match layer_sizes");
    for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
      DenseLayer layer;
      layer.in = net.sizes_[l];
      layer.out = net.sizes_[l + 1];
      const auto& rows = weights[l];
      if (rows.size() != layer.out) throw LoadError("weight matrix has the wrong number of rows");
      for (const auto& row : rows) {
        auto values = row.get<std::vector<double>>();
        if (values.size() != layer.in) throw LoadError("weight row has the wrong length");
        layer.weights.insert(layer.weights.end(), values.begin(), values.end());
      }
      layer.biases = biases[l].get<std::vector<double>>();
      if (layer.biases.size() != layer.out) throw LoadError("bias vector has the wrong length");
      net.layers_.push_back(std::move(layer));
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed network document: ") + e.what());
  }
}

}  // namespace iil
