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

#include <array>

#include "voxnorm/types.hpp"

namespace voxnorm {

/// Closed triangle vs closed axis-aligned cube, separating-axis test over the
/// 3 box normals, the triangle normal and the 9 edge/box-axis cross products
/// (Akenine-Moller). Touching counts as overlap. Degenerate triangles reduce
/// to segment/point tests because zero axes never separate.
bool triangle_box_overlap(const std::array<Vec3, 3>& tri, const Vec3& box_center,
                          double half_size);

}  // namespace voxnorm
