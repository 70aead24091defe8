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
#include <iosfwd>

#include "voxnorm/voxelizer.hpp"

namespace voxnorm {

// Grid dump, little-endian:
//   "NNVX" | u32 version (1) | u32 T_s | f32 L_c | (2T_s+1)^3 * 3 f32 labels
// with labels in x-major, then y, then z order.
inline constexpr std::uint32_t kGridFormatVersion = 1;

void write_grid(std::ostream& out, const VolumetricGrid& grid);
VolumetricGrid read_grid(std::istream& in);

void save_grid(const VolumetricGrid& grid, const std::filesystem::path& path);
VolumetricGrid load_grid(const std::filesystem::path& path);

}  // namespace voxnorm
