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

// Central finite-difference check of Network<double> parameter gradients.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "voxnorm/network.hpp"
#include "voxnorm/random.hpp"

namespace voxnorm::oracle {

// Every layer type: plain conv, standalone BN, ReLU, a projection block, an
// identity block, max-pool, FC with BN, tanh. Input [3][4][4][4], 2 heads.
inline nn::NetworkSpec tiny_spec() {
  nn::NetworkSpec s;
  s.input_channels = 3;
  s.heads = 2;
  s.layers = {nn::ConvSpec{3, 1, 3, 4, true},
              nn::BatchNormSpec{4},
              nn::ReluSpec{},
              nn::ResidualBlockSpec{1, 4, 6, 3, 2},
              nn::ResidualBlockSpec{2, 6, 6, 3, 1},
              nn::GlobalMaxPoolSpec{},
              nn::FullyConnectedSpec{6, 8},
              nn::BatchNormSpec{8},
              nn::ReluSpec{},
              nn::FullyConnectedSpec{8, 6},
              nn::TanhSpec{}};
  return s;
}

struct GradCheck {
  double worst = 0.0;
  std::string worst_param;
  std::size_t checked = 0;
};

inline double mse_only(const Tensor<double>& y, const Tensor<double>& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y.data[i] - t.data[i]) * (y.data[i] - t.data[i]);
  return s / static_cast<double>(y.size());
}

// Relative error |a - n| / max(|a| + |n|, floor) over every trainable entry.
inline GradCheck check_gradients(nn::Network<double>& net, const Tensor<double>& x,
                                 const Tensor<double>& t, double h = 1e-5,
                                 double floor = 1e-6) {
  net.zero_grad();
  net.backward(x, t, nn::Mode::kTrain);
  GradCheck r;
  for (nn::Parameter<double>* p : net.trainable_parameters()) {
    const std::vector<double> analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = mse_only(net.forward(x, nn::Mode::kTrain), t);
      p->value[i] = keep - h;
      const double down = mse_only(net.forward(x, nn::Mode::kTrain), t);
      p->value[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double err =
          std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]) + std::abs(numeric), floor);
      if (err > r.worst) {
        r.worst = err;
        r.worst_param = p->name + "[" + std::to_string(i) + "]";
      }
      ++r.checked;
    }
  }
  return r;
}

inline Tensor<double> random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (double& v : t.data) v = scale * rng.normal();
  return t;
}

}  // namespace voxnorm::oracle
