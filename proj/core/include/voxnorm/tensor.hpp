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

#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "voxnorm/types.hpp"

namespace voxnorm {

std::string shape_to_string(std::span<const int> shape);

inline std::size_t shape_size(std::span<const int> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

/// Dense batch-first tensor. Volumes are stored channels-first per sample:
/// [B][C][D][H][W], where D/H/W follow the grid's x/y/z axes. Dense layers
/// use [B][F].
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> dims, T fill = T(0))
      : shape(std::move(dims)), data(shape_size(shape), fill) {}

  std::size_t size() const { return data.size(); }
  int batch() const { return shape.empty() ? 0 : shape[0]; }
  std::vector<int> sample_shape() const { return {shape.begin() + 1, shape.end()}; }
  std::size_t sample_size() const { return batch() == 0 ? 0 : size() / batch(); }
  T* sample(int b) { return data.data() + b * sample_size(); }
  const T* sample(int b) const { return data.data() + b * sample_size(); }
};

}  // namespace voxnorm
