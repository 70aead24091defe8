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


#include "voxnorm/training_data.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "voxnorm/grid_io.hpp"

namespace voxnorm {
namespace {

std::string grid_name(std::uint32_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08u.nnvx", id);
  return buf;
}

}  // namespace

void write_training_data(const std::filesystem::path& dir, const std::vector<TrainingTuple>& tuples,
                         const std::string& meta_json) {
  if (tuples.empty()) throw Error("no training tuples to write");
  const std::size_t heads = tuples.front().targets.size();
  std::filesystem::create_directories(dir / "tuples");
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (tuples[i].targets.size() != heads) throw Error("tuples disagree on the number of targets");
    save_grid(tuples[i].grid, dir / "tuples" / grid_name(static_cast<std::uint32_t>(i)));
  }

  std::ofstream out(dir / "targets.bin", std::ios::binary);
  if (!out) throw Error("cannot write '" + (dir / "targets.bin").string() + "'");
  binary::write_magic(out, "NNTG");
  binary::write_u32(out, static_cast<std::uint32_t>(tuples.size()));
  std::vector<float> row(3 * heads);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    binary::write_u32(out, static_cast<std::uint32_t>(i));
    for (std::size_t h = 0; h < heads; ++h) {
      for (int k = 0; k < 3; ++k) row[3 * h + k] = static_cast<float>(tuples[i].targets[h][k]);
    }
    binary::write_f32s(out, row);
  }
  if (!out) throw Error("write failed for targets.bin");

  nlohmann::json meta = meta_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(meta_json);
  meta["count"] = tuples.size();
  meta["heads"] = heads;
  meta["half_extent"] = tuples.front().grid.half_extent;
  nlohmann::json provenance = nlohmann::json::array();
  for (const TrainingTuple& t : tuples) provenance.push_back({t.mesh_id, t.face_id, t.stage});
  meta["provenance"] = std::move(provenance);
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

DiskTupleSource::DiskTupleSource(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::ifstream meta_in(dir_ / "meta.json");
  if (!meta_in) throw Error("training data directory '" + dir_.string() + "' has no meta.json");
  const nlohmann::json meta = nlohmann::json::parse(meta_in);
  heads_ = meta.at("heads").get<int>();
  half_extent_ = meta.at("half_extent").get<int>();
  if (heads_ < 1) throw Error("meta.json: heads must be >= 1");

  std::ifstream in(dir_ / "targets.bin", std::ios::binary);
  if (!in) throw Error("cannot open '" + (dir_ / "targets.bin").string() + "'");
  binary::Reader reader(in, "unexpected end of targets file");
  if (reader.bytes(4) != "NNTG") throw Error("bad targets magic (expected NNTG)");
  const std::uint32_t count = reader.u32();
  ids_.resize(count);
  targets_.resize(static_cast<std::size_t>(count) * 3 * heads_);
  for (std::uint32_t i = 0; i < count; ++i) {
    ids_[i] = reader.u32();
    reader.f32s(std::span(targets_).subspan(static_cast<std::size_t>(i) * 3 * heads_, 3 * heads_));
  }
  if (!reader.at_end()) throw Error("trailing bytes in targets.bin");
  if (count == 0) throw Error("training data directory holds no tuples");
}

std::filesystem::path DiskTupleSource::grid_path(std::size_t i) const {
  return dir_ / "tuples" / grid_name(ids_.at(i));
}

void DiskTupleSource::fill(std::size_t i, float* grid_dst, float* target_dst) const {
  const VolumetricGrid grid = load_grid(grid_path(i));
  if (grid.half_extent != half_extent_) throw Error("grid " + grid_path(i).string() + " has the wrong size");
  grid_to_tensor(grid, grid_dst);
  std::copy_n(targets_.begin() + static_cast<std::ptrdiff_t>(i) * 3 * heads_, 3 * heads_, target_dst);
}

}  // namespace voxnorm
