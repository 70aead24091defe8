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

#include "voxnorm/triangle_box.hpp"

#include <algorithm>
#include <cmath>

namespace voxnorm {
namespace {

// True when `axis` separates the triangle (vertices relative to the box
// center) from the box. A zero axis never separates.
bool separated_on(const Vec3& axis, const Vec3& v0, const Vec3& v1, const Vec3& v2, double h) {
  const double p0 = axis.dot(v0);
  const double p1 = axis.dot(v1);
  const double p2 = axis.dot(v2);
  const double r = h * (std::abs(axis.x()) + std::abs(axis.y()) + std::abs(axis.z()));
  const double lo = std::min({p0, p1, p2});
  const double hi = std::max({p0, p1, p2});
  return lo > r || hi < -r;
}

}  // namespace

bool triangle_box_overlap(const std::array<Vec3, 3>& tri, const Vec3& box_center,
                          double half_size) {
  const Vec3 v0 = tri[0] - box_center;
  const Vec3 v1 = tri[1] - box_center;
  const Vec3 v2 = tri[2] - box_center;

  // Box face normals: triangle AABB vs box.
  for (int k = 0; k < 3; ++k) {
    const double lo = std::min({v0[k], v1[k], v2[k]});
    const double hi = std::max({v0[k], v1[k], v2[k]});
    if (lo > half_size || hi < -half_size) return false;
  }

  const Vec3 e0 = v1 - v0;
  const Vec3 e1 = v2 - v1;
  const Vec3 e2 = v0 - v2;

  // Edge x box-axis cross products.
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& e : {e0, e1, e2}) {
    for (const Vec3& a : axes) {
      if (separated_on(e.cross(a), v0, v1, v2, half_size)) return false;
    }
  }

  // Triangle plane.
  const Vec3 n = e0.cross(e1);
  return !separated_on(n, v0, v1, v2, half_size);
}

}  // namespace voxnorm
