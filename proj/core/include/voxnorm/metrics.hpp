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

#include <string>

#include "voxnorm/mesh.hpp"

namespace voxnorm {

enum class AngularErrorMode {
  kMean,        // mean angle, degrees
  kMeanSquare,  // mean of squared angles, degrees^2
};

/// Angle between two vectors in degrees, from atan2(|a x b|, a . b).
double angle_between_deg(const Vec3& a, const Vec3& b);

/// E_a: mean angular deviation between corresponding face normals over faces
/// that are non-degenerate in both meshes. Requires identical face lists.
double mean_angular_error(const TriangleMesh& denoised, const TriangleMesh& truth,
                          AngularErrorMode mode = AngularErrorMode::kMean);

/// Same, on raw normal fields (zero entries skipped).
double mean_angular_error(const NormalField& estimate, const NormalField& truth,
                          AngularErrorMode mode = AngularErrorMode::kMean);

/// Closest point on triangle (a, b, c) to p (Voronoi-region walk).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// E_v: sqrt(mean over denoised vertices of squared distance to the truth
/// surface), distances to the exact closest point over all truth triangles.
double vertex_l2_error(const TriangleMesh& denoised, const TriangleMesh& truth);

struct MetricReport {
  double e_a = 0.0;
  double e_v = 0.0;
  std::size_t faces = 0;
  std::size_t vertices = 0;

  std::string to_json() const;
};

MetricReport evaluate(const TriangleMesh& denoised, const TriangleMesh& truth);

}  // namespace voxnorm
