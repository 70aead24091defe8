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


#include "voxnorm/training.hpp"

#include "voxnorm/random.hpp"

namespace voxnorm {

void grid_to_tensor(const VolumetricGrid& grid, float* dst) {
  const std::size_t n = grid.num_cubes();
  if (grid.labels.size() != 3 * n) throw Error("grid label count does not match T_s");
  for (std::size_t c = 0; c < n; ++c) {
    dst[c] = grid.labels[3 * c];
    dst[n + c] = grid.labels[3 * c + 1];
    dst[2 * n + c] = grid.labels[3 * c + 2];
  }
}

MemoryTupleSource::MemoryTupleSource(const std::vector<TrainingTuple>& tuples) : tuples_(tuples) {
  if (tuples_.empty()) throw Error("no training tuples");
  half_extent_ = tuples_.front().grid.half_extent;
  heads_ = static_cast<int>(tuples_.front().targets.size());
  for (const TrainingTuple& t : tuples_) {
    if (t.grid.half_extent != half_extent_ || static_cast<int>(t.targets.size()) != heads_) {
      throw Error("training tuples disagree on grid size or head count");
    }
  }
}

void MemoryTupleSource::fill(std::size_t i, float* grid_dst, float* target_dst) const {
  const TrainingTuple& t = tuples_.at(i);
  grid_to_tensor(t.grid, grid_dst);
  for (int h = 0; h < heads_; ++h) {
    for (int k = 0; k < 3; ++k) target_dst[3 * h + k] = static_cast<float>(t.targets[h][k]);
  }
}

namespace nn {

void pack_batch(const TupleSource& data, std::span<const std::size_t> indices, Tensor<float>& input,
                Tensor<float>& targets) {
  const int side = 2 * data.half_extent() + 1;
  const int b = static_cast<int>(indices.size());
  input = Tensor<float>({b, 3, side, side, side});
  targets = Tensor<float>({b, 3 * data.heads()});
  for (int i = 0; i < b; ++i) data.fill(indices[i], input.sample(i), targets.sample(i));
}

TrainReport train_network(Network<float>& net, AdamOptimizer<float>& optimizer,
                          const TupleSource& data, const TrainOptions& options) {
  if (options.batch < 1) throw Error("batch size must be >= 1");
  if (options.epochs < 0) throw Error("epoch count must be >= 0");
  if (data.size() == 0) throw Error("no training data");
  if (3 * data.heads() != net.spec().output_width()) {
    throw Error("training targets have " + std::to_string(data.heads()) +
                " heads, network has " + std::to_string(net.spec().heads));
  }
  Rng rng(options.seed);
  std::vector<std::size_t> order(data.size());
  TrainReport report;
  Tensor<float> input, targets;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += options.batch) {
      const std::size_t n = std::min<std::size_t>(options.batch, order.size() - start);
      if (n == 1 && options.batch > 1 && order.size() > 1) break;
      pack_batch(data, std::span(order).subspan(start, n), input, targets);
      const double loss = net.backward(input, targets, Mode::kTrain);
      const double lr = lr_schedule(net.step());
      optimizer.step(net, lr);
      ++report.steps;
      report.last_loss = loss;
      if (options.progress) options.progress({net.step(), epoch, loss, lr});
      if (options.target_loss > 0.0 && loss < options.target_loss) {
        report.reached_target = true;
        report.epochs = epoch + 1;
        return report;
      }
      if (options.max_steps && report.steps >= options.max_steps) {
        report.epochs = epoch + 1;
        return report;
      }
    }
    report.epochs = epoch + 1;
  }
  return report;
}

}  // namespace nn
}  // namespace voxnorm
