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


#include "voxnorm/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

#include <Eigen/Core>

#include "voxnorm/random.hpp"

namespace voxnorm {

std::string shape_to_string(std::span<const int> shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << ']';
  return out.str();
}

namespace nn {

NetworkSpec build_normalnet_spec(int heads) {
  if (heads < 1) throw Error("network needs at least one head");
  NetworkSpec spec;
  spec.input_channels = 3;
  spec.heads = heads;
  if (heads == static_cast<int>(default_mu_g_list().size())) spec.mu_g_list = default_mu_g_list();
  int channels = 3;
  for (int i = 1; i <= 3; ++i) {
    const int out = 64 << (i - 1);
    spec.layers.push_back(ResidualBlockSpec{i, channels, out, i == 1 ? 5 : 3, 2});
    channels = out;
  }
  spec.layers.push_back(GlobalMaxPoolSpec{});
  for (int width : {512, 256, 128}) {
    spec.layers.push_back(FullyConnectedSpec{channels, width});
    spec.layers.push_back(BatchNormSpec{width});
    spec.layers.push_back(ReluSpec{});
    channels = width;
  }
  spec.layers.push_back(FullyConnectedSpec{channels, 3 * heads});
  spec.layers.push_back(TanhSpec{});
  return spec;
}

NetworkSpec build_normalnet_spec(std::vector<double> mu_g_list) {
  NetworkSpec spec = build_normalnet_spec(static_cast<int>(mu_g_list.size()));
  spec.mu_g_list = std::move(mu_g_list);
  return spec;
}

const WeightBlob* NetworkWeights::find(const std::string& name) const {
  for (const WeightBlob& b : blobs) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Layers

template <typename T>
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode, bool record) = 0;
  /// Accumulates parameter grads; returns d/dx unless input grads are off.
  virtual Tensor<T> backward(const Tensor<T>& g) = 0;
  virtual void collect(std::vector<Parameter<T>*>&) {}
  virtual void set_input_grad(bool on) { input_grad_ = on; }

 protected:
  [[noreturn]] void shape_error(const std::string& what, const std::vector<int>& in) const {
    throw Error("layer " + name_ + ": " + what + ", got input " + shape_to_string(in));
  }
  void require_cache(bool has) const {
    if (!has) throw Error("layer " + name_ + ": backward without a recorded forward pass");
  }

  std::string name_;
  bool input_grad_ = true;
};

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;
template <typename T>
using MapVec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
Parameter<T> make_param(std::string name, std::vector<int> shape, bool trainable = true) {
  Parameter<T> p;
  p.name = std::move(name);
  p.shape = std::move(shape);
  p.value.assign(shape_size(p.shape), T(0));
  p.grad.assign(p.value.size(), T(0));
  p.trainable = trainable;
  return p;
}

struct ConvGeometry {
  int c, d, h, w;  // input
  int k, s, p;
  int od, oh, ow;

  std::size_t rows() const { return static_cast<std::size_t>(c) * k * k * k; }
  std::size_t cols() const { return static_cast<std::size_t>(od) * oh * ow; }
};

template <typename T>
void im2col(const ConvGeometry& g, const T* src, T* col) {
  T* dst = col;
  for (int c = 0; c < g.c; ++c) {
    const T* volume = src + static_cast<std::size_t>(c) * g.d * g.h * g.w;
    for (int kd = 0; kd < g.k; ++kd) {
      for (int kh = 0; kh < g.k; ++kh) {
        for (int kw = 0; kw < g.k; ++kw) {
          for (int od = 0; od < g.od; ++od) {
            const int id = od * g.s - g.p + kd;
            if (id < 0 || id >= g.d) {
              std::fill(dst, dst + g.oh * g.ow, T(0));
              dst += g.oh * g.ow;
              continue;
            }
            for (int oh = 0; oh < g.oh; ++oh) {
              const int ih = oh * g.s - g.p + kh;
              if (ih < 0 || ih >= g.h) {
                std::fill(dst, dst + g.ow, T(0));
                dst += g.ow;
                continue;
              }
              const T* line = volume + (static_cast<std::size_t>(id) * g.h + ih) * g.w;
              for (int ow = 0; ow < g.ow; ++ow) {
                const int iw = ow * g.s - g.p + kw;
                *dst++ = (iw >= 0 && iw < g.w) ? line[iw] : T(0);
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const ConvGeometry& g, const T* col, T* dst_volume) {
  const T* src = col;
  for (int c = 0; c < g.c; ++c) {
    T* volume = dst_volume + static_cast<std::size_t>(c) * g.d * g.h * g.w;
    for (int kd = 0; kd < g.k; ++kd) {
      for (int kh = 0; kh < g.k; ++kh) {
        for (int kw = 0; kw < g.k; ++kw) {
          for (int od = 0; od < g.od; ++od) {
            const int id = od * g.s - g.p + kd;
            if (id < 0 || id >= g.d) {
              src += g.oh * g.ow;
              continue;
            }
            for (int oh = 0; oh < g.oh; ++oh) {
              const int ih = oh * g.s - g.p + kh;
              if (ih < 0 || ih >= g.h) {
                src += g.ow;
                continue;
              }
              T* line = volume + (static_cast<std::size_t>(id) * g.h + ih) * g.w;
              for (int ow = 0; ow < g.ow; ++ow, ++src) {
                const int iw = ow * g.s - g.p + kw;
                if (iw >= 0 && iw < g.w) line[iw] += *src;
              }
            }
          }
        }
      }
    }
  }
}

int strided_extent(int in, int stride) { return (in + stride - 1) / stride; }

template <typename T>
class Conv3d final : public Layer<T> {
 public:
  Conv3d(std::string name, const ConvSpec& spec) : Layer<T>(std::move(name)), spec_(spec) {
    if (spec.kernel < 1 || spec.kernel % 2 == 0) throw Error("layer " + this->name_ + ": kernel must be odd");
    if (spec.stride < 1 || spec.in_channels < 1 || spec.out_channels < 1) {
      throw Error("layer " + this->name_ + ": invalid convolution parameters");
    }
    const int k = spec.kernel;
    weight_ = make_param<T>(this->name_ + ".weight", {spec.out_channels, spec.in_channels, k, k, k});
    if (spec.bias) bias_ = make_param<T>(this->name_ + ".bias", {spec.out_channels});
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 4 || in[0] != spec_.in_channels) {
      this->shape_error("expected [" + std::to_string(spec_.in_channels) + "xDxHxW]", in);
    }
    return {spec_.out_channels, strided_extent(in[1], spec_.stride),
            strided_extent(in[2], spec_.stride), strided_extent(in[3], spec_.stride)};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode, bool record) override {
    const ConvGeometry g = geometry(x.sample_shape());
    Tensor<T> y({x.batch(), spec_.out_channels, g.od, g.oh, g.ow});
    std::vector<T> col(g.rows() * g.cols());
    const ConstMapMat<T> w(weight_.value.data(), spec_.out_channels, g.rows());
    for (int b = 0; b < x.batch(); ++b) {
      im2col(g, x.sample(b), col.data());
      MapMat<T> out(y.sample(b), spec_.out_channels, g.cols());
      out.noalias() = w * ConstMapMat<T>(col.data(), g.rows(), g.cols());
      if (spec_.bias) {
        for (int o = 0; o < spec_.out_channels; ++o) out.row(o).array() += bias_.value[o];
      }
    }
    if (record) input_ = x;
    has_cache_ = record;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    this->require_cache(has_cache_);
    const ConvGeometry g = geometry(input_.sample_shape());
    std::vector<T> col(g.rows() * g.cols());
    MapMat<T> dw(weight_.grad.data(), spec_.out_channels, g.rows());
    const ConstMapMat<T> w(weight_.value.data(), spec_.out_channels, g.rows());
    Tensor<T> gx;
    if (this->input_grad_) gx = Tensor<T>(input_.shape);
    for (int b = 0; b < input_.batch(); ++b) {
      const ConstMapMat<T> go(gy.sample(b), spec_.out_channels, g.cols());
      im2col(g, input_.sample(b), col.data());
      dw.noalias() += go * ConstMapMat<T>(col.data(), g.rows(), g.cols()).transpose();
      if (spec_.bias) {
        // Plain loop: Eigen's vectorized sum peels by address, so its order
        // would depend on where the batch happens to be allocated.
        for (int o = 0; o < spec_.out_channels; ++o) {
          const T* row = gy.sample(b) + static_cast<std::size_t>(o) * g.cols();
          T acc = T(0);
          for (std::size_t i = 0; i < g.cols(); ++i) acc += row[i];
          bias_.grad[o] += acc;
        }
      }
      if (this->input_grad_) {
        MapMat<T>(col.data(), g.rows(), g.cols()).noalias() = w.transpose() * go;
        col2im(g, col.data(), gx.sample(b));
      }
    }
    return gx;
  }

  void collect(std::vector<Parameter<T>*>& out) override {
    out.push_back(&weight_);
    if (spec_.bias) out.push_back(&bias_);
  }

 private:
  ConvGeometry geometry(const std::vector<int>& in) const {
    const std::vector<int> o = output_shape(in);
    return {in[0], in[1], in[2], in[3], spec_.kernel, spec_.stride, spec_.kernel / 2, o[1], o[2], o[3]};
  }

  ConvSpec spec_;
  Parameter<T> weight_, bias_;
  Tensor<T> input_;
  bool has_cache_ = false;
};

template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  BatchNorm(std::string name, const BatchNormSpec& spec) : Layer<T>(std::move(name)), spec_(spec) {
    if (spec.channels < 1) throw Error("layer " + this->name_ + ": channels must be >= 1");
    const int c = spec.channels;
    gamma_ = make_param<T>(this->name_ + ".gamma", {c});
    beta_ = make_param<T>(this->name_ + ".beta", {c});
    mean_ = make_param<T>(this->name_ + ".running_mean", {c}, false);
    var_ = make_param<T>(this->name_ + ".running_var", {c}, false);
    std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
    std::fill(var_.value.begin(), var_.value.end(), T(1));
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.empty() || in[0] != spec_.channels) {
      this->shape_error("expected " + std::to_string(spec_.channels) + " channels", in);
    }
    return in;
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, bool record) override {
    output_shape(x.sample_shape());
    const int batch = x.batch();
    const int channels = spec_.channels;
    const std::size_t spatial = x.sample_size() / channels;
    const double count = static_cast<double>(batch) * spatial;
    Tensor<T> y(x.shape);
    inv_std_.assign(channels, 0.0);
    if (record) xhat_ = Tensor<T>(x.shape);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels; ++c) {
      double mean, var;
      if (mode == Mode::kTrain) {
        double sum = 0.0;
        for (int b = 0; b < batch; ++b) {
          const T* p = x.sample(b) + c * spatial;
          for (std::size_t i = 0; i < spatial; ++i) sum += p[i];
        }
        mean = sum / count;
        double sq = 0.0;
        for (int b = 0; b < batch; ++b) {
          const T* p = x.sample(b) + c * spatial;
          for (std::size_t i = 0; i < spatial; ++i) sq += (p[i] - mean) * (p[i] - mean);
        }
        var = sq / count;
        const double m = spec_.momentum;
        mean_.value[c] = static_cast<T>(m * mean_.value[c] + (1.0 - m) * mean);
        var_.value[c] = static_cast<T>(m * var_.value[c] + (1.0 - m) * var);
      } else {
        mean = mean_.value[c];
        var = var_.value[c];
      }
      const double inv = 1.0 / std::sqrt(var + spec_.epsilon);
      inv_std_[c] = inv;
      const double gamma = gamma_.value[c];
      const double beta = beta_.value[c];
      for (int b = 0; b < batch; ++b) {
        const T* p = x.sample(b) + c * spatial;
        T* q = y.sample(b) + c * spatial;
        T* h = record ? xhat_.sample(b) + c * spatial : nullptr;
        for (std::size_t i = 0; i < spatial; ++i) {
          const double xh = (p[i] - mean) * inv;
          q[i] = static_cast<T>(gamma * xh + beta);
          if (h) h[i] = static_cast<T>(xh);
        }
      }
    }
    mode_ = mode;
    has_cache_ = record;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    this->require_cache(has_cache_);
    const int batch = xhat_.batch();
    const int channels = spec_.channels;
    const std::size_t spatial = xhat_.sample_size() / channels;
    const double count = static_cast<double>(batch) * spatial;
    Tensor<T> gx;
    if (this->input_grad_) gx = Tensor<T>(xhat_.shape);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels; ++c) {
      double dgamma = 0.0, dbeta = 0.0;
      for (int b = 0; b < batch; ++b) {
        const T* g = gy.sample(b) + c * spatial;
        const T* h = xhat_.sample(b) + c * spatial;
        for (std::size_t i = 0; i < spatial; ++i) {
          dgamma += static_cast<double>(g[i]) * h[i];
          dbeta += g[i];
        }
      }
      gamma_.grad[c] += static_cast<T>(dgamma);
      beta_.grad[c] += static_cast<T>(dbeta);
      if (!this->input_grad_) continue;
      const double scale = gamma_.value[c] * inv_std_[c];
      for (int b = 0; b < batch; ++b) {
        const T* g = gy.sample(b) + c * spatial;
        const T* h = xhat_.sample(b) + c * spatial;
        T* out = gx.sample(b) + c * spatial;
        for (std::size_t i = 0; i < spatial; ++i) {
          if (mode_ == Mode::kTrain) {
            out[i] = static_cast<T>(scale * (g[i] - dbeta / count - h[i] * dgamma / count));
          } else {
            out[i] = static_cast<T>(scale * g[i]);
          }
        }
      }
    }
    return gx;
  }

  void collect(std::vector<Parameter<T>*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&mean_);
    out.push_back(&var_);
  }

  Parameter<T>& gamma() { return gamma_; }

 private:
  BatchNormSpec spec_;
  Parameter<T> gamma_, beta_, mean_, var_;
  Tensor<T> xhat_;
  std::vector<double> inv_std_;
  Mode mode_ = Mode::kInference;
  bool has_cache_ = false;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  using Layer<T>::Layer;

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

  Tensor<T> forward(const Tensor<T>& x, Mode, bool record) override {
    Tensor<T> y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
    if (record) output_ = y;
    has_cache_ = record;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    this->require_cache(has_cache_);
    Tensor<T> gx(gy.shape);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      gx.data[i] = output_.data[i] > T(0) ? gy.data[i] : T(0);
    }
    return gx;
  }

 private:
  Tensor<T> output_;
  bool has_cache_ = false;
};

template <typename T>
class ResidualBlock final : public Layer<T> {
 public:
  ResidualBlock(std::string name, const ResidualBlockSpec& s)
      : Layer<T>(std::move(name)),
        spec_(s),
        conv1_(this->name_ + ".conv1", ConvSpec{s.first_kernel, s.stride, s.in_channels, s.out_channels, false}),
        bn1_(this->name_ + ".bn1", BatchNormSpec{s.out_channels}),
        relu1_(this->name_ + ".relu1"),
        conv2_(this->name_ + ".conv2", ConvSpec{3, 1, s.out_channels, s.out_channels, false}),
        bn2_(this->name_ + ".bn2", BatchNormSpec{s.out_channels}),
        relu_out_(this->name_ + ".relu") {
    if (s.stride != 1 || s.in_channels != s.out_channels) {
      shortcut_ = std::make_unique<Conv3d<T>>(
          this->name_ + ".shortcut", ConvSpec{1, s.stride, s.in_channels, s.out_channels, true});
    }
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    return conv2_.output_shape(conv1_.output_shape(in));
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, bool record) override {
    Tensor<T> a = conv1_.forward(x, mode, record);
    a = bn1_.forward(a, mode, record);
    a = relu1_.forward(a, mode, record);
    a = conv2_.forward(a, mode, record);
    a = bn2_.forward(a, mode, record);
    if (shortcut_) {
      const Tensor<T> s = shortcut_->forward(x, mode, record);
      for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += s.data[i];
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += x.data[i];
    }
    return relu_out_.forward(a, mode, record);
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const Tensor<T> g = relu_out_.backward(gy);
    Tensor<T> ga = bn2_.backward(g);
    ga = conv2_.backward(ga);
    ga = relu1_.backward(ga);
    ga = bn1_.backward(ga);
    Tensor<T> gx = conv1_.backward(ga);
    if (shortcut_) {
      const Tensor<T> gs = shortcut_->backward(g);
      if (this->input_grad_) {
        for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += gs.data[i];
      }
    } else if (this->input_grad_) {
      for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += g.data[i];
    }
    return gx;
  }

  void collect(std::vector<Parameter<T>*>& out) override {
    conv1_.collect(out);
    bn1_.collect(out);
    conv2_.collect(out);
    bn2_.collect(out);
    if (shortcut_) shortcut_->collect(out);
  }

  void set_input_grad(bool on) override {
    this->input_grad_ = on;
    conv1_.set_input_grad(on);
    if (shortcut_) shortcut_->set_input_grad(on);
  }

 private:
  ResidualBlockSpec spec_;
  Conv3d<T> conv1_;
  BatchNorm<T> bn1_;
  Relu<T> relu1_;
  Conv3d<T> conv2_;
  BatchNorm<T> bn2_;
  Relu<T> relu_out_;
  std::unique_ptr<Conv3d<T>> shortcut_;
};

template <typename T>
class GlobalMaxPool final : public Layer<T> {
 public:
  using Layer<T>::Layer;

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() < 2) this->shape_error("expected [CxDxHxW]", in);
    return {in[0]};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode, bool record) override {
    const int channels = output_shape(x.sample_shape())[0];
    const std::size_t spatial = x.sample_size() / channels;
    Tensor<T> y({x.batch(), channels});
    std::vector<std::size_t> arg(static_cast<std::size_t>(x.batch()) * channels);
    for (int b = 0; b < x.batch(); ++b) {
      for (int c = 0; c < channels; ++c) {
        const T* p = x.sample(b) + c * spatial;
        const std::size_t best = std::max_element(p, p + spatial) - p;
        y.sample(b)[c] = p[best];
        arg[static_cast<std::size_t>(b) * channels + c] = best;
      }
    }
    if (record) {
      argmax_ = std::move(arg);
      input_shape_ = x.shape;
    }
    has_cache_ = record;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    this->require_cache(has_cache_);
    Tensor<T> gx(input_shape_);
    const int channels = input_shape_[1];
    const std::size_t spatial = gx.sample_size() / channels;
    for (int b = 0; b < gx.batch(); ++b) {
      for (int c = 0; c < channels; ++c) {
        gx.sample(b)[c * spatial + argmax_[static_cast<std::size_t>(b) * channels + c]] =
            gy.sample(b)[c];
      }
    }
    return gx;
  }

 private:
  std::vector<std::size_t> argmax_;
  std::vector<int> input_shape_;
  bool has_cache_ = false;
};

template <typename T>
class FullyConnected final : public Layer<T> {
 public:
  FullyConnected(std::string name, const FullyConnectedSpec& spec)
      : Layer<T>(std::move(name)), spec_(spec) {
    if (spec.in_features < 1 || spec.out_features < 1) {
      throw Error("layer " + this->name_ + ": invalid feature counts");
    }
    weight_ = make_param<T>(this->name_ + ".weight", {spec.out_features, spec.in_features});
    bias_ = make_param<T>(this->name_ + ".bias", {spec.out_features});
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 1 || in[0] != spec_.in_features) {
      this->shape_error("expected [" + std::to_string(spec_.in_features) + "]", in);
    }
    return {spec_.out_features};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode, bool record) override {
    output_shape(x.sample_shape());
    Tensor<T> y({x.batch(), spec_.out_features});
    const ConstMapMat<T> in(x.data.data(), x.batch(), spec_.in_features);
    const ConstMapMat<T> w(weight_.value.data(), spec_.out_features, spec_.in_features);
    MapMat<T> out(y.data.data(), x.batch(), spec_.out_features);
    out.noalias() = in * w.transpose();
    for (int b = 0; b < x.batch(); ++b) {
      for (int o = 0; o < spec_.out_features; ++o) out(b, o) += bias_.value[o];
    }
    if (record) input_ = x;
    has_cache_ = record;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    this->require_cache(has_cache_);
    const int batch = input_.batch();
    const ConstMapMat<T> g(gy.data.data(), batch, spec_.out_features);
    const ConstMapMat<T> in(input_.data.data(), batch, spec_.in_features);
    MapMat<T>(weight_.grad.data(), spec_.out_features, spec_.in_features).noalias() +=
        g.transpose() * in;
    for (int b = 0; b < batch; ++b) {
      for (int o = 0; o < spec_.out_features; ++o) bias_.grad[o] += g(b, o);
    }
    Tensor<T> gx;
    if (this->input_grad_) {
      gx = Tensor<T>(input_.shape);
      const ConstMapMat<T> w(weight_.value.data(), spec_.out_features, spec_.in_features);
      MapMat<T>(gx.data.data(), batch, spec_.in_features).noalias() = g * w;
    }
    return gx;
  }

  void collect(std::vector<Parameter<T>*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  FullyConnectedSpec spec_;
  Parameter<T> weight_, bias_;
  Tensor<T> input_;
  bool has_cache_ = false;
};

template <typename T>
class Tanh final : public Layer<T> {
 public:
  using Layer<T>::Layer;

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

  Tensor<T> forward(const Tensor<T>& x, Mode, bool record) override {
    Tensor<T> y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = std::tanh(x.data[i]);
    if (record) output_ = y;
    has_cache_ = record;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    this->require_cache(has_cache_);
    Tensor<T> gx(gy.shape);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      const T y = output_.data[i];
      gx.data[i] = gy.data[i] * (T(1) - y * y);
    }
    return gx;
  }

 private:
  Tensor<T> output_;
  bool has_cache_ = false;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <typename T>
std::vector<std::unique_ptr<Layer<T>>> build_layers(const NetworkSpec& spec) {
  std::vector<std::unique_ptr<Layer<T>>> layers;
  int conv = 0, bn = 0, relu = 0, pool = 0, fc = 0, tanh = 0;
  auto numbered = [](const char* base, int& n) { return base + std::to_string(++n); };
  for (const LayerSpec& ls : spec.layers) {
    std::visit(Overloaded{
                   [&](const ConvSpec& s) {
                     layers.push_back(std::make_unique<Conv3d<T>>(numbered("conv", conv), s));
                   },
                   [&](const BatchNormSpec& s) {
                     layers.push_back(std::make_unique<BatchNorm<T>>(numbered("bn", bn), s));
                   },
                   [&](const ReluSpec&) {
                     layers.push_back(std::make_unique<Relu<T>>(numbered("relu", relu)));
                   },
                   [&](const ResidualBlockSpec& s) {
                     layers.push_back(std::make_unique<ResidualBlock<T>>(
                         "block" + std::to_string(s.index), s));
                   },
                   [&](const GlobalMaxPoolSpec&) {
                     layers.push_back(std::make_unique<GlobalMaxPool<T>>(numbered("pool", pool)));
                   },
                   [&](const FullyConnectedSpec& s) {
                     layers.push_back(std::make_unique<FullyConnected<T>>(numbered("fc", fc), s));
                   },
                   [&](const TanhSpec&) {
                     layers.push_back(std::make_unique<Tanh<T>>(numbered("tanh", tanh)));
                   },
               },
               ls);
  }
  if (!layers.empty()) layers.front()->set_input_grad(false);
  return layers;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Network

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  if (spec_.heads < 1) throw Error("network needs at least one head");
  if (!spec_.mu_g_list.empty() && static_cast<int>(spec_.mu_g_list.size()) != spec_.heads) {
    throw Error("mu_g list length does not match the head count");
  }
  layers_ = build_layers<T>(spec_);
}

template <typename T>
Network<T>::~Network() = default;
template <typename T>
Network<T>::Network(Network&&) noexcept = default;
template <typename T>
Network<T>& Network<T>::operator=(Network&&) noexcept = default;

template <typename T>
void Network<T>::initialize(std::uint64_t seed, double stddev) {
  Rng rng(seed);
  for (Parameter<T>* p : parameters()) {
    if (ends_with(p->name, ".weight")) {
      for (T& v : p->value) v = static_cast<T>(rng.truncated_normal(stddev));
    } else if (ends_with(p->name, ".gamma") || ends_with(p->name, ".running_var")) {
      std::fill(p->value.begin(), p->value.end(), T(1));
    } else {
      std::fill(p->value.begin(), p->value.end(), T(0));
    }
  }
  step_ = 0;
}

template <typename T>
std::vector<int> Network<T>::output_shape(const std::vector<int>& sample_shape) const {
  std::vector<int> shape = sample_shape;
  for (const auto& layer : layers_) shape = layer->output_shape(shape);
  if (shape.size() != 1 || shape[0] != spec_.output_width()) {
    throw Error("network output " + shape_to_string(shape) + " does not match 3N = " +
                std::to_string(spec_.output_width()));
  }
  return shape;
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& input, Mode mode, bool record) {
  if (input.batch() < 1) throw Error("forward needs a batch of at least one sample");
  if (input.size() != shape_size(input.shape)) throw Error("tensor storage does not match its shape");
  output_shape(input.sample_shape());
  Tensor<T> x = layers_.front()->forward(input, mode, record);
  for (std::size_t i = 1; i < layers_.size(); ++i) x = layers_[i]->forward(x, mode, record);
  return x;
}

template <typename T>
double mse_loss(const Tensor<T>& output, const Tensor<T>& targets, Tensor<T>* grad) {
  if (output.shape != targets.shape) {
    throw Error("target shape " + shape_to_string(targets.shape) + " does not match output " +
                shape_to_string(output.shape));
  }
  const double n = static_cast<double>(output.size());
  std::vector<double> sq(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double d = static_cast<double>(output.data[i]) - targets.data[i];
    sq[i] = d * d;
  }
  const double loss = pairwise_sum(sq) / n;
  if (grad) {
    *grad = Tensor<T>(output.shape);
    for (std::size_t i = 0; i < output.size(); ++i) {
      grad->data[i] = static_cast<T>(2.0 * (static_cast<double>(output.data[i]) - targets.data[i]) / n);
    }
  }
  return loss;
}

template <typename T>
double Network<T>::backward(const Tensor<T>& input, const Tensor<T>& targets, Mode mode) {
  for (T v : targets.data) {
    if (!std::isfinite(static_cast<double>(v))) throw Error("targets must be finite");
  }
  zero_grad();
  const Tensor<T> out = forward(input, mode, true);
  Tensor<T> grad;
  const double loss = mse_loss(out, targets, &grad);
  if (!std::isfinite(loss)) throw Error("non-finite loss");
  backward_from(grad);
  return loss;
}

template <typename T>
void Network<T>::backward_from(const Tensor<T>& grad_output) {
  Tensor<T> g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_) layer->collect(out);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::trainable_parameters() {
  std::vector<Parameter<T>*> out;
  for (Parameter<T>* p : parameters()) {
    if (p->trainable) out.push_back(p);
  }
  return out;
}

template <typename T>
void Network<T>::zero_grad() {
  for (Parameter<T>* p : parameters()) std::fill(p->grad.begin(), p->grad.end(), T(0));
}

template <typename T>
NetworkWeights Network<T>::export_weights() const {
  NetworkWeights w;
  w.step = step_;
  for (Parameter<T>* p : const_cast<Network*>(this)->parameters()) {
    WeightBlob b;
    b.name = p->name;
    b.dims.assign(p->shape.begin(), p->shape.end());
    b.data.assign(p->value.begin(), p->value.end());
    w.blobs.push_back(std::move(b));
  }
  return w;
}

template <typename T>
void Network<T>::import_weights(const NetworkWeights& weights) {
  const std::vector<Parameter<T>*> params = parameters();
  if (weights.blobs.size() != params.size()) {
    throw Error("weights hold " + std::to_string(weights.blobs.size()) + " blobs, network expects " +
                std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const WeightBlob& b = weights.blobs[i];
    const Parameter<T>& p = *params[i];
    if (b.name != p.name) {
      throw Error("weights mismatch at layer " + p.name + ": found blob " + b.name);
    }
    const std::vector<int> dims(b.dims.begin(), b.dims.end());
    if (dims != p.shape || b.data.size() != p.value.size()) {
      throw Error("weights mismatch at layer " + p.name + ": shape " + shape_to_string(dims) +
                  ", expected " + shape_to_string(p.shape));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(weights.blobs[i].data.begin(), weights.blobs[i].data.end(), params[i]->value.begin());
  }
  step_ = weights.step;
}

template class Network<float>;
template class Network<double>;
template double mse_loss(const Tensor<float>&, const Tensor<float>&, Tensor<float>*);
template double mse_loss(const Tensor<double>&, const Tensor<double>&, Tensor<double>*);

}  // namespace nn
}  // namespace voxnorm
