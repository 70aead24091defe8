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
#include <functional>
#include <vector>

#include "voxnorm/adam.hpp"
#include "voxnorm/network.hpp"
#include "voxnorm/voxelizer.hpp"

namespace voxnorm {

/// One regression sample: a face grid and its N target normals, both in the
/// face's normalized frame.
struct TrainingTuple {
  VolumetricGrid grid;
  std::vector<Vec3> targets;
  int mesh_id = 0;
  int face_id = 0;
  int stage = 1;
};

/// Copies grid labels (x, y, z, channel) into channels-first [3][x][y][z].
void grid_to_tensor(const VolumetricGrid& grid, float* dst);

/// Random-access training data.
class TupleSource {
 public:
  virtual ~TupleSource() = default;
  virtual std::size_t size() const = 0;
  virtual int half_extent() const = 0;
  virtual int heads() const = 0;
  /// Writes tuple i as a channels-first grid and 3N targets.
  virtual void fill(std::size_t i, float* grid_dst, float* target_dst) const = 0;
};

class MemoryTupleSource final : public TupleSource {
 public:
  explicit MemoryTupleSource(const std::vector<TrainingTuple>& tuples);

  std::size_t size() const override { return tuples_.size(); }
  int half_extent() const override { return half_extent_; }
  int heads() const override { return heads_; }
  void fill(std::size_t i, float* grid_dst, float* target_dst) const override;

 private:
  const std::vector<TrainingTuple>& tuples_;
  int half_extent_ = 0;
  int heads_ = 0;
};

namespace nn {

struct TrainProgress {
  std::uint64_t step = 0;
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainOptions {
  int epochs = 10;
  int batch = 80;
  std::uint64_t seed = 1;
  /// Stop after this many optimizer steps in total (0: no limit).
  std::uint64_t max_steps = 0;
  /// Stop once a mini-batch loss falls below this value (0: never).
  double target_loss = 0.0;
  std::function<void(const TrainProgress&)> progress;
};

struct TrainReport {
  std::uint64_t steps = 0;
  int epochs = 0;
  double last_loss = 0.0;
  bool reached_target = false;
};

/// Seeded shuffled mini-batch training with Adam and the decaying learning
/// rate. A trailing batch of a single sample is dropped.
TrainReport train_network(Network<float>& net, AdamOptimizer<float>& optimizer,
                          const TupleSource& data, const TrainOptions& options);

/// Packs tuples `indices` into an input batch and a target batch.
void pack_batch(const TupleSource& data, std::span<const std::size_t> indices, Tensor<float>& input,
                Tensor<float>& targets);

}  // namespace nn
}  // namespace voxnorm
