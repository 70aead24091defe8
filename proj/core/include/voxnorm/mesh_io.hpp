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

#include "voxnorm/mesh.hpp"

namespace voxnorm {

enum class MeshFormat { kObj, kOff };

/// Picks the format from the file extension (.obj / .off, case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);

// OBJ: only `v` and `f` records are read; texture and normal references in
// `f` entries are ignored. Faces must be triangles.
TriangleMesh read_obj(std::istream& in);
TriangleMesh read_off(std::istream& in);

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);

/// Default writer precision. Use 17 for a bit-exact round trip.
inline constexpr int kDefaultMeshPrecision = 9;

void write_obj(std::ostream& out, const TriangleMesh& mesh, int precision = kDefaultMeshPrecision);
void write_off(std::ostream& out, const TriangleMesh& mesh, int precision = kDefaultMeshPrecision);

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format,
               int precision = kDefaultMeshPrecision);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               int precision = kDefaultMeshPrecision);

}  // namespace voxnorm
