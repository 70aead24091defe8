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

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "voxnorm/mesh.hpp"

namespace voxnorm {

/// Length divided by alpha_c to get the cube side.
enum class CubeBasis {
  kEdgeLength,        // mean edge length; about 40-60 cubes per face at alpha_c = 8
  kCentroidDistance,  // MeshScales::d_s, the mean adjacent-centroid distance
};

struct VoxelParams {
  int half_extent = 20;  // T_s; the grid is (2 T_s + 1)^3 cubes
  double alpha_c = 8.0;  // cube side L_c = basis / alpha_c
  CubeBasis cube_basis = CubeBasis::kEdgeLength;
  Vec3 target_dir = Vec3::UnitY();
  int candidate_ring = 4;
  int normalization_ring = 2;

  int side() const { return 2 * half_extent + 1; }
  void validate() const;
};

/// Pose normalization v' = translation + rotation * v. The rotation carries
/// the patch-average normal onto the target direction; the translation moves
/// the face centroid to the origin.
struct NormalizationTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& v) const { return rotation * v + translation; }
};

/// Minimal rotation taking unit vector `from` onto unit vector `to`. When the
/// two are (nearly) opposite, a half turn about a fixed axis orthogonal to
/// `to` is applied first: the coordinate axis least aligned with `to`
/// (lowest index on ties) projected off `to`, i.e. (1,0,0) for (0,1,0).
Mat3 rotation_between(const Vec3& from, const Vec3& to);

NormalizationTransform compute_normalization(const TriangleMesh& mesh, int f,
                                             const VoxelParams& params);

/// Dense cube-label grid around one face, labels in the normalized frame.
/// Storage is x-major, then y, then z, three floats per cube; cube (0,0,0)
/// sits at index (T_s, T_s, T_s).
struct VolumetricGrid {
  int half_extent = 0;
  double cube_size = 0.0;
  std::vector<float> labels;
  int occupancy = 0;
  int warnings = 0;
  /// Rotation used to build the grid (not serialized).
  Mat3 rotation = Mat3::Identity();

  int side() const { return 2 * half_extent + 1; }
  std::size_t num_cubes() const {
    return static_cast<std::size_t>(side()) * side() * side();
  }
  /// Flat cube index for coordinates in [-T_s, T_s].
  std::size_t cube_index(int x, int y, int z) const {
    const int s = side();
    return (static_cast<std::size_t>(x + half_extent) * s + (y + half_extent)) * s +
           (z + half_extent);
  }
  Eigen::Vector3f label(int x, int y, int z) const {
    const std::size_t i = 3 * cube_index(x, y, z);
    return {labels[i], labels[i + 1], labels[i + 2]};
  }
};

enum class OverlapSearch {
  kIndexed,     // per-triangle bounding-box range of cubes
  kBruteForce,  // every cube against every candidate face
};

/// Voxelizer bound to one mesh. The cube size is computed once from the
/// mesh scales; each face query is pure and may run concurrently.
class FaceVoxelizer {
 public:
  FaceVoxelizer(const TriangleMesh& mesh, VoxelParams params);

  double cube_size() const { return cube_size_; }
  const VoxelParams& params() const { return params_; }

  VolumetricGrid voxelize(int f, OverlapSearch search = OverlapSearch::kIndexed) const;

  /// Number of cubes overlapped by face f alone.
  int face_cube_count(int f) const;

 private:
  const TriangleMesh& mesh_;
  VoxelParams params_;
  double cube_size_ = 0.0;
};

VolumetricGrid voxelize_face(const TriangleMesh& mesh, int f, const VoxelParams& params,
                             OverlapSearch search = OverlapSearch::kIndexed);

using GridSink = std::function<void(int face, VolumetricGrid&& grid)>;

/// Voxelizes `faces` (all non-degenerate faces when empty) and hands the
/// grids to `sink` in ascending face order. Grids are produced in parallel
/// chunks of `chunk` faces.
void voxelize_mesh(const TriangleMesh& mesh, const VoxelParams& params, const GridSink& sink,
                   std::span<const int> faces = {}, int chunk = 16,
                   OverlapSearch search = OverlapSearch::kIndexed);

}  // namespace voxnorm
