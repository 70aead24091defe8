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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "voxnorm/adam.hpp"
#include "voxnorm/network.hpp"
#include "voxnorm/random.hpp"
#include "voxnorm/weights_io.hpp"
#include "support/gradcheck.hpp"

namespace voxnorm::nn {
namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

template <typename T>
Parameter<T>* param(Network<T>& net, const std::string& name) {
  for (Parameter<T>* p : net.parameters()) {
    if (p->name == name) return p;
  }
  return nullptr;
}

NetworkSpec blocks_then(int blocks, std::vector<LayerSpec> tail, int heads) {
  NetworkSpec full = build_normalnet_spec(6);
  NetworkSpec s;
  s.heads = heads;
  s.layers.assign(full.layers.begin(), full.layers.begin() + blocks);
  s.layers.insert(s.layers.end(), tail.begin(), tail.end());
  return s;
}

TEST(NetworkSpec, DefaultArchitectureShapes) {
  const NetworkSpec spec = build_normalnet_spec(6);
  EXPECT_EQ(spec.output_width(), 18);
  EXPECT_EQ(spec.mu_g_list, default_mu_g_list());
  Network<float> net(spec);
  EXPECT_EQ(net.output_shape({3, 41, 41, 41}), std::vector<int>{18});
  Network<float> one(build_normalnet_spec(1));
  EXPECT_EQ(one.output_shape({3, 41, 41, 41}), std::vector<int>{3});
  EXPECT_TRUE(build_normalnet_spec(1).mu_g_list.empty());
  EXPECT_THROW(build_normalnet_spec(0), Error);
}

TEST(NetworkSpec, BlockResolutions) {
  const std::vector<std::string> want{"[64x21x21x21]", "[128x11x11x11]", "[256x6x6x6]"};
  for (int b = 1; b <= 3; ++b) {
    Network<float> net(blocks_then(b, {}, 1));
    const std::string msg = error_of([&] { net.output_shape({3, 41, 41, 41}); });
    EXPECT_NE(msg.find(want[b - 1]), std::string::npos) << msg;
  }
  Network<float> pooled(blocks_then(3, {GlobalMaxPoolSpec{}, FullyConnectedSpec{256, 3}}, 1));
  EXPECT_EQ(pooled.output_shape({3, 41, 41, 41}), std::vector<int>{3});
}

TEST(NetworkSpec, ShapeErrorsNameTheLayer) {
  Network<float> net(build_normalnet_spec(6));
  const std::string msg = error_of([&] { net.output_shape({4, 41, 41, 41}); });
  EXPECT_NE(msg.find("layer block1.conv1"), std::string::npos) << msg;
  NetworkSpec bad = build_normalnet_spec(2);
  bad.mu_g_list = {0.3};
  EXPECT_THROW(Network<float>{bad}, Error);
}

TEST(Network, ZeroWeightsGiveZeroOutput) {
  Network<float> net(oracle::tiny_spec());
  net.initialize(1);
  for (Parameter<float>* p : net.parameters()) {
    if (p->name.ends_with(".weight")) std::fill(p->value.begin(), p->value.end(), 0.0f);
  }
  Tensor<float> x({2, 3, 4, 4, 4}, 0.7f);
  for (Mode m : {Mode::kTrain, Mode::kInference}) {
    for (float v : net.forward(x, m).data) EXPECT_EQ(v, 0.0f);
  }
}

TEST(Network, OutputIsBoundedAndBatchIndependentInInference) {
  Network<float> net(oracle::tiny_spec());
  net.initialize(2, 1.0);
  Rng rng(3);
  Tensor<float> one({1, 3, 4, 4, 4});
  for (float& v : one.data) v = static_cast<float>(5.0 * rng.normal());
  Tensor<float> three({3, 3, 4, 4, 4});
  for (int b = 0; b < 3; ++b) std::copy(one.data.begin(), one.data.end(), three.sample(b));
  const Tensor<float> y1 = net.forward(one, Mode::kInference);
  const Tensor<float> y3 = net.forward(three, Mode::kInference);
  ASSERT_EQ(y3.shape, (std::vector<int>{3, 6}));
  for (int b = 0; b < 3; ++b) {
    for (int i = 0; i < 6; ++i) EXPECT_EQ(y3.sample(b)[i], y1.data[i]);
  }
  for (float v : y3.data) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Network, GradientsMatchFiniteDifferences) {
  Network<double> net(oracle::tiny_spec());
  net.initialize(4, 0.5);
  Rng rng(5);
  const Tensor<double> x = oracle::random_tensor({4, 3, 4, 4, 4}, rng);
  const Tensor<double> t = oracle::random_tensor({4, 6}, rng, 0.5);
  const oracle::GradCheck r = oracle::check_gradients(net, x, t);
  EXPECT_GT(r.checked, 2000u);
  EXPECT_LT(r.worst, 1e-3) << r.worst_param;
}

TEST(Network, InferenceLossAndGradientVanishAtTargets) {
  Network<double> net(oracle::tiny_spec());
  net.initialize(6, 0.5);
  Rng rng(7);
  const Tensor<double> x = oracle::random_tensor({3, 3, 4, 4, 4}, rng);
  const Tensor<double> y = net.forward(x, Mode::kInference);
  EXPECT_EQ(net.backward(x, y, Mode::kInference), 0.0);
  for (Parameter<double>* p : net.trainable_parameters()) {
    for (double g : p->grad) ASSERT_EQ(g, 0.0) << p->name;
  }
}

TEST(Network, NonFiniteTargetsThrow) {
  Network<double> net(oracle::tiny_spec());
  net.initialize(6);
  Tensor<double> x({2, 3, 4, 4, 4}, 0.1);
  Tensor<double> t({2, 6}, 0.0);
  t.data[3] = std::nan("");
  EXPECT_THROW(net.backward(x, t, Mode::kTrain), Error);
  EXPECT_THROW(net.backward(x, Tensor<double>({2, 5}), Mode::kTrain), Error);
}

TEST(Mse, ValueAndGradient) {
  Tensor<double> y({2, 3}), t({2, 3}), g;
  for (int i = 0; i < 6; ++i) {
    y.data[i] = 0.1 * i;
    t.data[i] = 0.05 * i * i;
  }
  double want = 0.0;
  for (int i = 0; i < 6; ++i) want += (y.data[i] - t.data[i]) * (y.data[i] - t.data[i]);
  EXPECT_NEAR(mse_loss(y, t, &g), want / 6, 1e-15);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(g.data[i], 2 * (y.data[i] - t.data[i]) / 6, 1e-15);
  // Doubling the residual quadruples the loss.
  Tensor<double> y2 = y;
  for (int i = 0; i < 6; ++i) y2.data[i] = t.data[i] + 2 * (y.data[i] - t.data[i]);
  EXPECT_NEAR(mse_loss<double>(y2, t, nullptr), 4 * want / 6, 1e-14);
}

TEST(ResidualBlock, ZeroBranchLeavesReluOfShortcut) {
  // Identity shortcut: output is max over space of relu(x).
  NetworkSpec s;
  s.heads = 1;
  s.layers = {ResidualBlockSpec{1, 3, 3, 3, 1}, GlobalMaxPoolSpec{}};
  Network<double> net(s);
  net.initialize(8, 0.5);
  std::fill(param(net, "block1.bn2.gamma")->value.begin(), param(net, "block1.bn2.gamma")->value.end(), 0.0);
  Rng rng(9);
  const Tensor<double> x = oracle::random_tensor({2, 3, 5, 5, 5}, rng);
  const Tensor<double> y = net.forward(x, Mode::kInference);
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < 3; ++c) {
      const double* p = x.sample(b) + c * 125;
      EXPECT_EQ(y.sample(b)[c], std::max(0.0, *std::max_element(p, p + 125)));
    }
  }
}

TEST(ResidualBlock, ProjectionShortcutSamplesEveryOtherVoxel) {
  NetworkSpec s;
  s.heads = 1;
  s.layers = {ResidualBlockSpec{1, 2, 3, 3, 2}, GlobalMaxPoolSpec{}};
  Network<double> net(s);
  net.initialize(10, 0.5);
  std::fill(param(net, "block1.bn2.gamma")->value.begin(), param(net, "block1.bn2.gamma")->value.end(), 0.0);
  const Parameter<double>& w = *param(net, "block1.shortcut.weight");
  const Parameter<double>& bias = *param(net, "block1.shortcut.bias");
  ASSERT_EQ(w.shape, (std::vector<int>{3, 2, 1, 1, 1}));
  Rng rng(11);
  const Tensor<double> x = oracle::random_tensor({1, 2, 5, 5, 5}, rng);
  const Tensor<double> y = net.forward(x, Mode::kInference);
  for (int o = 0; o < 3; ++o) {
    double best = 0.0;
    for (int d = 0; d < 5; d += 2) {
      for (int h = 0; h < 5; h += 2) {
        for (int v = 0; v < 5; v += 2) {
          double acc = bias.value[o];
          for (int c = 0; c < 2; ++c) acc += w.value[o * 2 + c] * x.data[c * 125 + d * 25 + h * 5 + v];
          best = std::max(best, acc);
        }
      }
    }
    EXPECT_NEAR(y.data[o], best, 1e-14);
  }
}

TEST(Pooling, InvariantToVoxelPermutation) {
  NetworkSpec s;
  s.heads = 1;
  s.layers = {GlobalMaxPoolSpec{}};
  Network<double> net(s);
  Rng rng(12);
  const Tensor<double> x = oracle::random_tensor({1, 3, 3, 3, 3}, rng);
  std::vector<std::size_t> perm(27);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Tensor<double> xp = x;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 27; ++i) xp.data[c * 27 + i] = x.data[c * 27 + perm[i]];
  }
  EXPECT_EQ(net.forward(x, Mode::kInference).data, net.forward(xp, Mode::kInference).data);
}

TEST(BatchNorm, TrainingUpdatesRunningStatistics) {
  NetworkSpec s;
  s.heads = 1;
  s.layers = {BatchNormSpec{3}, GlobalMaxPoolSpec{}};
  Network<double> net(s);
  net.initialize(1);
  Rng rng(13);
  const Tensor<double> x = oracle::random_tensor({2, 3, 2, 2, 2}, rng);
  net.forward(x, Mode::kTrain);
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (int b = 0; b < 2; ++b) {
      for (int i = 0; i < 8; ++i) mean += x.sample(b)[c * 8 + i];
    }
    mean /= 16;
    for (int b = 0; b < 2; ++b) {
      for (int i = 0; i < 8; ++i) var += std::pow(x.sample(b)[c * 8 + i] - mean, 2);
    }
    var /= 16;
    EXPECT_NEAR(param(net, "bn1.running_mean")->value[c], 0.1 * mean, 1e-14);
    EXPECT_NEAR(param(net, "bn1.running_var")->value[c], 0.9 + 0.1 * var, 1e-14);
  }
  // Inference mode leaves them alone.
  const std::vector<double> keep = param(net, "bn1.running_mean")->value;
  net.forward(x, Mode::kInference);
  EXPECT_EQ(param(net, "bn1.running_mean")->value, keep);
}

TEST(Adam, ScheduleValues) {
  EXPECT_DOUBLE_EQ(lr_schedule(0), 1e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(4999), 1e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(5000), 0.96e-4);
  EXPECT_NEAR(lr_schedule(10000), 9.216e-5, 1e-18);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Network<double> net(oracle::tiny_spec());
  net.initialize(14, 0.5);
  Rng rng(15);
  const Tensor<double> x = oracle::random_tensor({3, 3, 4, 4, 4}, rng);
  const Tensor<double> t = oracle::random_tensor({3, 6}, rng, 0.5);
  net.backward(x, t, Mode::kTrain);
  std::vector<std::vector<double>> before, grads;
  for (Parameter<double>* p : net.trainable_parameters()) {
    before.push_back(p->value);
    grads.push_back(p->grad);
  }
  AdamOptimizer<double> opt;
  opt.step(net, 1e-3);
  EXPECT_EQ(net.step(), 1u);
  std::size_t k = 0;
  for (Parameter<double>* p : net.trainable_parameters()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = grads[k][i];
      const double want = before[k][i] - 1e-3 * g / (std::abs(g) + 1e-8);
      ASSERT_NEAR(p->value[i], want, 1e-15) << p->name;
    }
    ++k;
  }
}

TEST(Adam, ZeroGradientIsANoOp) {
  Network<double> net(oracle::tiny_spec());
  net.initialize(16);
  const NetworkWeights before = net.export_weights();
  net.zero_grad();
  AdamOptimizer<double> opt;
  opt.step(net);
  opt.step(net);
  EXPECT_EQ(net.step(), 2u);
  const NetworkWeights after = net.export_weights();
  for (std::size_t i = 0; i < before.blobs.size(); ++i) EXPECT_EQ(before.blobs[i].data, after.blobs[i].data);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    Network<float> net(oracle::tiny_spec());
    net.initialize(17, 0.3);
    Rng rng(18);
    Tensor<float> x({4, 3, 4, 4, 4}), t({4, 6});
    for (float& v : x.data) v = static_cast<float>(rng.normal());
    for (float& v : t.data) v = static_cast<float>(0.5 * rng.normal());
    AdamOptimizer<float> opt;
    std::vector<double> losses;
    for (int i = 0; i < 5; ++i) {
      losses.push_back(net.backward(x, t, Mode::kTrain));
      opt.step(net, 1e-2);
    }
    return std::make_pair(losses, net.export_weights().blobs.back().data);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
  EXPECT_LT(a.first.back(), a.first.front());
}

TEST(WeightsIo, RoundTripIsByteIdentical) {
  Network<float> net(oracle::tiny_spec());
  net.initialize(19);
  net.set_step(1234);
  std::stringstream first;
  write_weights(first, net.export_weights());
  const NetworkWeights loaded = read_weights(first);
  EXPECT_EQ(loaded.step, 1234u);
  Network<float> other(oracle::tiny_spec());
  other.import_weights(loaded);
  EXPECT_EQ(other.step(), 1234u);
  std::stringstream second;
  write_weights(second, other.export_weights());
  EXPECT_EQ(first.str(), second.str());
}

TEST(WeightsIo, Errors) {
  Network<float> net(oracle::tiny_spec());
  net.initialize(20);
  std::stringstream ss;
  write_weights(ss, net.export_weights());
  const std::string bytes = ss.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 7));
  EXPECT_EQ(error_of([&] { read_weights(cut); }), "unexpected end of weights blob");
  std::stringstream magic("NOPE" + bytes.substr(4));
  EXPECT_THROW(read_weights(magic), Error);
  std::stringstream extra(bytes + "x");
  EXPECT_THROW(read_weights(extra), Error);

  NetworkWeights big = net.export_weights();
  big.step = std::uint64_t{1} << 24;
  std::stringstream sink;
  EXPECT_THROW(write_weights(sink, big), Error);

  NetworkSpec wider = oracle::tiny_spec();
  std::get<ConvSpec>(wider.layers[0]).out_channels = 5;
  std::get<BatchNormSpec>(wider.layers[1]).channels = 5;
  std::get<ResidualBlockSpec>(wider.layers[3]).in_channels = 5;
  Network<float> mismatch(wider);
  const std::string msg = error_of([&] { mismatch.import_weights(net.export_weights()); });
  EXPECT_NE(msg.find("weights mismatch at layer conv1.weight"), std::string::npos) << msg;
}

}  // namespace
}  // namespace voxnorm::nn
