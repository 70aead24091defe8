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
#include <vector>

#include "voxnorm/network.hpp"

namespace voxnorm::nn {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// 1e-4 * 0.96^floor(step / 5000).
double lr_schedule(std::uint64_t step);

/// Bias-corrected Adam over a network's trainable parameters. Moment buffers
/// start at zero and live with the optimizer, not the weights file.
template <typename T>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamHyper hyper = {}) : hyper_(hyper) {}

  const AdamHyper& hyper() const { return hyper_; }

  /// One update with learning rate `lr` using the current parameter grads;
  /// increments the network's step counter.
  void step(Network<T>& net, double lr);
  /// Same, with lr_schedule(net.step()).
  void step(Network<T>& net) { step(net, lr_schedule(net.step())); }

  void reset() { m_.clear(), v_.clear(); }

 private:
  AdamHyper hyper_;
  std::vector<std::vector<double>> m_, v_;
};

extern template class AdamOptimizer<float>;
extern template class AdamOptimizer<double>;

}  // namespace voxnorm::nn
