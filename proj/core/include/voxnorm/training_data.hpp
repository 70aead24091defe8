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

#include <filesystem>
#include <string>
#include <vector>

#include "voxnorm/training.hpp"

namespace voxnorm {

inline constexpr std::uint32_t kTargetsFormatVersion = 1;

/// Writes `dir/tuples/NNNNNNNN.nnvx`, `dir/targets.bin` and `dir/meta.json`.
/// targets.bin is "NNTG", u32 count, then per tuple u32 grid id and N x 3
/// f32 targets. `meta_json` is stored verbatim (an object, or empty for {}).
void write_training_data(const std::filesystem::path& dir, const std::vector<TrainingTuple>& tuples,
                         const std::string& meta_json = {});

/// Training data read back from a directory: targets are held in memory,
/// grids are loaded on demand.
class DiskTupleSource final : public TupleSource {
 public:
  explicit DiskTupleSource(std::filesystem::path dir);

  std::size_t size() const override { return ids_.size(); }
  int half_extent() const override { return half_extent_; }
  int heads() const override { return heads_; }
  void fill(std::size_t i, float* grid_dst, float* target_dst) const override;

  std::filesystem::path grid_path(std::size_t i) const;

 private:
  std::filesystem::path dir_;
  std::vector<std::uint32_t> ids_;
  std::vector<float> targets_;
  int half_extent_ = 0;
  int heads_ = 0;
};

}  // namespace voxnorm
