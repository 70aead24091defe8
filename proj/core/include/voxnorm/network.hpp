// Copyright 2026 The voxnorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "voxnorm/tensor.hpp"

namespace voxnorm::nn {

// ---------------------------------------------------------------------------
// Architecture description

/// 3D convolution with zero "same" padding (kernel/2); output extent is
/// ceil(in / stride).
struct ConvSpec {
  int kernel = 3;
  int stride = 1;
  int in_channels = 0;
  int out_channels = 0;
  bool bias = true;
};

struct BatchNormSpec {
  int channels = 0;
  double epsilon = 1e-5;
  double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
};

struct ReluSpec {};

/// conv(first_kernel, stride) -> BN -> ReLU -> conv(3, 1) -> BN, plus a
/// shortcut, then ReLU. The shortcut is the identity when shapes match and a
/// 1x1x1 convolution (with bias) at the block stride otherwise. The two
/// branch convolutions carry no bias; the BN shift covers it.
struct ResidualBlockSpec {
  int index = 1;
  int in_channels = 0;
  int out_channels = 0;
  int first_kernel = 3;
  int stride = 2;
};

struct GlobalMaxPoolSpec {};

struct FullyConnectedSpec {
  int in_features = 0;
  int out_features = 0;
};

struct TanhSpec {};

using LayerSpec = std::variant<ConvSpec, BatchNormSpec, ReluSpec, ResidualBlockSpec,
                               GlobalMaxPoolSpec, FullyConnectedSpec, TanhSpec>;

struct NetworkSpec {
  int input_channels = 3;
  std::vector<LayerSpec> layers;
  /// Number of filtered-normal heads N; the output width is 3 N.
  int heads = 6;
  /// mu_g value each head was trained for, in head order.
  std::vector<double> mu_g_list;

  int output_width() const { return 3 * heads; }
};

inline const std::vector<double>& default_mu_g_list() {
  static const std::vector<double> list{0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
  return list;
}

/// Three residual blocks (64, 128, 256 channels; 5^3 first kernel in block
/// 1, stride 2 at each block entry), global max-pool, then FC 512 -> 256 ->
/// 128 with BN + ReLU and a final FC to 3 N with tanh.
NetworkSpec build_normalnet_spec(int heads);
NetworkSpec build_normalnet_spec(std::vector<double> mu_g_list);

// ---------------------------------------------------------------------------
// Parameters and serialized weights

template <typename T>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool trainable = true;
};

struct WeightBlob {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

/// Ordered parameter blobs plus the optimizer step counter.
struct NetworkWeights {
  std::vector<WeightBlob> blobs;
  std::uint64_t step = 0;

  const WeightBlob* find(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Engine

enum class Mode {
  kTrain,      // batch statistics; running statistics are updated
  kInference,  // running statistics
};

template <typename T>
class Layer;

/// Feed-forward engine for the layer vocabulary of NetworkSpec.
///
/// Instantiated for float (training and inference) and double (gradient
/// checking). Forward passes cache activations only when `record` is set.
template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec);
  ~Network();
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  const NetworkSpec& spec() const { return spec_; }

  /// Truncated normal (+-2 sigma) weights, zero biases, unit BN scales.
  void initialize(std::uint64_t seed, double stddev = 0.01);

  /// Per-sample output shape for a per-sample input shape [C, D, H, W];
  /// throws naming the first layer whose input does not fit.
  std::vector<int> output_shape(const std::vector<int>& sample_shape) const;

  Tensor<T> forward(const Tensor<T>& input, Mode mode, bool record = false);

  /// Forward with caching, mean squared error against `targets`
  /// (batch x 3N), then reverse-mode gradients into every parameter (grads
  /// are overwritten). Returns the loss; non-finite losses throw.
  double backward(const Tensor<T>& input, const Tensor<T>& targets, Mode mode);

  /// Gradient of an arbitrary upstream signal d(loss)/d(output) after a
  /// recorded forward pass; parameter grads are accumulated.
  void backward_from(const Tensor<T>& grad_output);

  std::vector<Parameter<T>*> parameters();
  std::vector<Parameter<T>*> trainable_parameters();
  void zero_grad();

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  NetworkWeights export_weights() const;
  /// Validates names and shapes against this network's manifest.
  void import_weights(const NetworkWeights& weights);

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::uint64_t step_ = 0;
};

extern template class Network<float>;
extern template class Network<double>;

/// Mean squared error over all elements; writes d(loss)/d(output) to `grad`
/// when non-null.
template <typename T>
double mse_loss(const Tensor<T>& output, const Tensor<T>& targets, Tensor<T>* grad);

}  // namespace voxnorm::nn
