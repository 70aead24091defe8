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

#include "voxnorm/voxelizer.hpp"

#include <algorithm>
#include <cmath>

#include "voxnorm/triangle_box.hpp"

namespace voxnorm {

void VoxelParams::validate() const {
  if (half_extent < 1) throw Error("half_extent (T_s) must be >= 1");
  if (!(alpha_c > 0.0)) throw Error("alpha_c must be > 0");
  if (std::abs(target_dir.norm() - 1.0) > 1e-9) throw Error("target direction must be unit length");
  if (candidate_ring < 0 || normalization_ring < 0) throw Error("ring radii must be >= 0");
}

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 k;
  k << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return k;
}

// Below this value of 1 + cos(angle) the vectors are treated as opposite.
constexpr double kOppositeTol = 1e-6;

Vec3 fallback_axis(const Vec3& to) {
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(to[i]) < std::abs(to[k])) k = i;
  }
  const Vec3 e = Vec3::Unit(k);
  return (e - e.dot(to) * to).normalized();
}

}  // namespace

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  const double c = from.dot(to);
  if (1.0 + c < kOppositeTol) {
    const Vec3 a = fallback_axis(to);
    const Mat3 half_turn = 2.0 * a * a.transpose() - Mat3::Identity();
    return rotation_between(half_turn * from, to) * half_turn;
  }
  const Mat3 k = skew(from.cross(to));
  return Mat3::Identity() + k + k * k / (1.0 + c);
}

NormalizationTransform compute_normalization(const TriangleMesh& mesh, int f,
                                             const VoxelParams& params) {
  mesh.check_face_index(f);
  if (mesh.is_degenerate(f)) throw Error("cannot normalize around a degenerate face");
  const Patch patch = build_ring_patch(mesh, f, params.normalization_ring);
  Vec3 sum = Vec3::Zero();
  for (int g : patch.members) sum += mesh.normal(g);
  const double len = sum.norm();
  if (len < 1e-12) throw Error("degenerate patch normal");
  NormalizationTransform t;
  t.rotation = rotation_between(sum / len, params.target_dir);
  t.translation = -(t.rotation * mesh.centroid(f));
  return t;
}

FaceVoxelizer::FaceVoxelizer(const TriangleMesh& mesh, VoxelParams params)
    : mesh_(mesh), params_(std::move(params)) {
  params_.validate();
  const MeshScales scales = compute_scales(mesh_);
  const double basis = params_.cube_basis == CubeBasis::kEdgeLength ? scales.e_avg : scales.d_s;
  cube_size_ = basis / params_.alpha_c;
}

namespace {

struct LocalFace {
  std::array<Vec3, 3> tri;
  Vec3 normal;
};

// Candidate faces in the normalized frame. Positions are formed from vertex
// differences relative to the center face, so translating the mesh leaves
// them unchanged whenever those differences are exact.
std::vector<LocalFace> local_candidates(const TriangleMesh& mesh, int f, const Mat3& rotation,
                                        int ring) {
  const Face& center = mesh.face(f);
  const Vec3& anchor = mesh.vertex(center[0]);
  const Vec3 offset =
      ((mesh.vertex(center[1]) - anchor) + (mesh.vertex(center[2]) - anchor)) / 3.0;
  const Patch patch = build_ring_patch(mesh, f, ring);
  std::vector<LocalFace> out;
  out.reserve(patch.members.size());
  for (int g : patch.members) {
    LocalFace lf;
    const Face& t = mesh.face(g);
    for (int k = 0; k < 3; ++k) lf.tri[k] = rotation * ((mesh.vertex(t[k]) - anchor) - offset);
    lf.normal = rotation * mesh.normal(g);
    out.push_back(lf);
  }
  return out;
}

}  // namespace

VolumetricGrid FaceVoxelizer::voxelize(int f, OverlapSearch search) const {
  const NormalizationTransform transform = compute_normalization(mesh_, f, params_);
  const std::vector<LocalFace> candidates =
      local_candidates(mesh_, f, transform.rotation, params_.candidate_ring);

  VolumetricGrid grid;
  grid.half_extent = params_.half_extent;
  grid.cube_size = cube_size_;
  grid.rotation = transform.rotation;
  const int T = params_.half_extent;
  const double L = cube_size_;
  const double h = 0.5 * L;
  const std::size_t n_cubes = grid.num_cubes();
  std::vector<double> sums(3 * n_cubes, 0.0);
  std::vector<char> hit(n_cubes, 0);

  auto accumulate = [&](std::size_t cube, const Vec3& n) {
    sums[3 * cube] += n.x();
    sums[3 * cube + 1] += n.y();
    sums[3 * cube + 2] += n.z();
    hit[cube] = 1;
  };

  if (search == OverlapSearch::kIndexed) {
    // Faces in ascending order; each cube therefore accumulates its normals
    // in the same order as the brute-force path.
    for (const LocalFace& lf : candidates) {
      int lo[3], hi[3];
      bool outside = false;
      for (int k = 0; k < 3; ++k) {
        const double mn = std::min({lf.tri[0][k], lf.tri[1][k], lf.tri[2][k]});
        const double mx = std::max({lf.tri[0][k], lf.tri[1][k], lf.tri[2][k]});
        lo[k] = std::max(-T, static_cast<int>(std::ceil(mn / L - 0.5)) - 1);
        hi[k] = std::min(T, static_cast<int>(std::floor(mx / L + 0.5)) + 1);
        if (lo[k] > hi[k]) outside = true;
      }
      if (outside) continue;
      for (int x = lo[0]; x <= hi[0]; ++x) {
        for (int y = lo[1]; y <= hi[1]; ++y) {
          for (int z = lo[2]; z <= hi[2]; ++z) {
            if (triangle_box_overlap(lf.tri, Vec3(x * L, y * L, z * L), h)) {
              accumulate(grid.cube_index(x, y, z), lf.normal);
            }
          }
        }
      }
    }
  } else {
    for (int x = -T; x <= T; ++x) {
      for (int y = -T; y <= T; ++y) {
        for (int z = -T; z <= T; ++z) {
          const Vec3 center(x * L, y * L, z * L);
          for (const LocalFace& lf : candidates) {
            if (triangle_box_overlap(lf.tri, center, h)) {
              accumulate(grid.cube_index(x, y, z), lf.normal);
            }
          }
        }
      }
    }
  }

  grid.labels.assign(3 * n_cubes, 0.0f);
  for (std::size_t c = 0; c < n_cubes; ++c) {
    if (!hit[c]) continue;
    const Vec3 s(sums[3 * c], sums[3 * c + 1], sums[3 * c + 2]);
    const double len = s.norm();
    if (len <= 1e-12) {
      ++grid.warnings;
      continue;
    }
    const Vec3 n = s / len;
    grid.labels[3 * c] = static_cast<float>(n.x());
    grid.labels[3 * c + 1] = static_cast<float>(n.y());
    grid.labels[3 * c + 2] = static_cast<float>(n.z());
    ++grid.occupancy;
  }
  return grid;
}

int FaceVoxelizer::face_cube_count(int f) const {
  const NormalizationTransform transform = compute_normalization(mesh_, f, params_);
  const std::vector<LocalFace> self = local_candidates(mesh_, f, transform.rotation, 0);
  const LocalFace& lf = self.front();
  const double L = cube_size_;
  int lo[3], hi[3];
  for (int k = 0; k < 3; ++k) {
    const double mn = std::min({lf.tri[0][k], lf.tri[1][k], lf.tri[2][k]});
    const double mx = std::max({lf.tri[0][k], lf.tri[1][k], lf.tri[2][k]});
    lo[k] = static_cast<int>(std::ceil(mn / L - 0.5)) - 1;
    hi[k] = static_cast<int>(std::floor(mx / L + 0.5)) + 1;
  }
  int count = 0;
  for (int x = lo[0]; x <= hi[0]; ++x) {
    for (int y = lo[1]; y <= hi[1]; ++y) {
      for (int z = lo[2]; z <= hi[2]; ++z) {
        if (triangle_box_overlap(lf.tri, Vec3(x * L, y * L, z * L), 0.5 * L)) ++count;
      }
    }
  }
  return count;
}

VolumetricGrid voxelize_face(const TriangleMesh& mesh, int f, const VoxelParams& params,
                             OverlapSearch search) {
  return FaceVoxelizer(mesh, params).voxelize(f, search);
}

void voxelize_mesh(const TriangleMesh& mesh, const VoxelParams& params, const GridSink& sink,
                   std::span<const int> faces, int chunk, OverlapSearch search) {
  const FaceVoxelizer voxelizer(mesh, params);
  std::vector<int> order;
  if (faces.empty()) {
    for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
      if (!mesh.is_degenerate(f)) order.push_back(f);
    }
  } else {
    order.assign(faces.begin(), faces.end());
  }
  chunk = std::max(chunk, 1);
  std::vector<VolumetricGrid> grids;
  for (std::size_t start = 0; start < order.size(); start += chunk) {
    const int n = static_cast<int>(std::min<std::size_t>(chunk, order.size() - start));
    grids.assign(n, {});
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) grids[i] = voxelizer.voxelize(order[start + i], search);
    for (int i = 0; i < n; ++i) sink(order[start + i], std::move(grids[i]));
  }
}

}  // namespace voxnorm
