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

#include "voxnorm/grid_io.hpp"

#include <fstream>

#include "binary_io.hpp"

namespace voxnorm {

void write_grid(std::ostream& out, const VolumetricGrid& grid) {
  if (grid.labels.size() != 3 * grid.num_cubes()) throw Error("grid label count does not match T_s");
  binary::write_magic(out, "NNVX");
  binary::write_u32(out, kGridFormatVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(grid.half_extent));
  binary::write_f32(out, static_cast<float>(grid.cube_size));
  binary::write_f32s(out, grid.labels);
}

VolumetricGrid read_grid(std::istream& in) {
  binary::Reader reader(in, "unexpected end of grid file");
  if (reader.bytes(4) != "NNVX") throw Error("bad grid magic (expected NNVX)");
  const std::uint32_t version = reader.u32();
  if (version != kGridFormatVersion) {
    throw Error("unsupported grid version " + std::to_string(version));
  }
  VolumetricGrid grid;
  const std::uint32_t ts = reader.u32();
  if (ts < 1 || ts > 512) throw Error("implausible grid half extent " + std::to_string(ts));
  grid.half_extent = static_cast<int>(ts);
  grid.cube_size = reader.f32();
  grid.labels.resize(3 * grid.num_cubes());
  reader.f32s(grid.labels);
  for (std::size_t c = 0; c < grid.num_cubes(); ++c) {
    if (grid.labels[3 * c] != 0.0f || grid.labels[3 * c + 1] != 0.0f ||
        grid.labels[3 * c + 2] != 0.0f) {
      ++grid.occupancy;
    }
  }
  return grid;
}

void save_grid(const VolumetricGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write grid file '" + path.string() + "'");
  write_grid(out, grid);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

VolumetricGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open grid file '" + path.string() + "'");
  return read_grid(in);
}

}  // namespace voxnorm
