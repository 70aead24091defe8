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
#include <optional>
#include <vector>

#include "voxnorm/mesh.hpp"

// Guided normal filtering: joint bilateral filtering of face normals with
// patch-based guidance, followed by iterative vertex updates.
namespace voxnorm::gnf {

enum class GuidanceAverage { kUnweighted, kAreaWeighted };

struct GnfParams {
  double mu_g = 0.3;         // range kernel width on |n_i - n_j|
  double mu_d_factor = 2.0;  // mu_d = mu_d_factor * d_c
  int nf = 10;               // filtering iterations
  int nv = 20;               // vertex updates per filtering iteration (0: normals only)
  int neighborhood_ring = 2;
  double epsilon = 1e-9;     // saliency denominator guard
  GuidanceAverage guidance_average = GuidanceAverage::kUnweighted;

  void validate() const;
};

/// exp(-|n_i - n_j|^2 / (2 mu_g^2))
double kernel_g(const Vec3& n_i, const Vec3& n_j, double mu_g);
/// exp(-|c_i - c_j|^2 / (2 mu_d^2))
double kernel_d(const Vec3& c_i, const Vec3& c_j, double mu_d);

/// |n_1 - n_2| for an edge with exactly two non-degenerate incident faces;
/// 0 for boundary and non-manifold edges.
double edge_saliency(const TriangleMesh& mesh, const NormalField& normals, int edge);
double edge_saliency(const TriangleMesh& mesh, int edge);

struct Consistency {
  double max_difference = 0.0;     // D(P)
  double relative_saliency = 0.0;  // R(P)
  double value = 0.0;              // C(P) = D(P) * R(P)
};

/// Consistency of a patch, with R(P) taken over edges whose two incident
/// faces both belong to the patch.
Consistency patch_consistency(const TriangleMesh& mesh, const NormalField& normals,
                              const Patch& patch, double epsilon);
Consistency patch_consistency(const TriangleMesh& mesh, const Patch& patch, double epsilon);

struct Guidance {
  NormalField normals;
  /// Center face of the 1-ring patch each guidance normal was taken from.
  std::vector<int> selected_center;
  int warnings = 0;
};

/// Guidance for every face: among the 1-ring patches that contain the face,
/// the one with the lowest consistency value wins (ties go to the smaller
/// center index) and its normalized average normal is returned.
Guidance compute_guidance(const TriangleMesh& mesh, const NormalField& normals, double epsilon,
                          GuidanceAverage average = GuidanceAverage::kUnweighted);
Guidance compute_guidance(const TriangleMesh& mesh, double epsilon,
                          GuidanceAverage average = GuidanceAverage::kUnweighted);

/// Guidance normal of a single face.
Vec3 guidance_normal(const TriangleMesh& mesh, int f, double epsilon,
                     GuidanceAverage average = GuidanceAverage::kUnweighted);

/// Per-face filtering neighborhoods: non-degenerate members of the r-ring
/// patch, the face itself included. Degenerate faces get an empty list.
std::vector<std::vector<int>> ring_neighborhoods(const TriangleMesh& mesh, int ring);

struct FilterResult {
  NormalField normals;
  int warnings = 0;
};

/// Joint bilateral filter of the mesh face normals:
///   n'_i = normalize( sum_{j in N_i} a_j G_d(c_i, c_j) G_g(g_i, g_j) n_j ),
/// a_j = face area, mu_d = mu_d_factor * d_c of `mesh`. A zero sum keeps the
/// current normal and counts a warning.
FilterResult guided_filter_normals(const TriangleMesh& mesh, const NormalField& guidance,
                                   const GnfParams& params,
                                   const std::vector<std::vector<int>>* neighborhoods = nullptr);

/// Same filter with ground-truth normals as guidance.
FilterResult gt_guided_filter_normals(const TriangleMesh& mesh, const NormalField& truth_normals,
                                      const GnfParams& params,
                                      const std::vector<std::vector<int>>* neighborhoods = nullptr);

/// Filtered normal of one face (unnormalized sum is returned through
/// `raw_sum` when non-null). Returns zero when the weighted sum vanishes.
Vec3 filter_face_normal(const TriangleMesh& mesh, int f, std::span<const int> neighborhood,
                        const NormalField& guidance, double mu_g, double mu_d,
                        Vec3* raw_sum = nullptr);

/// N_v Jacobi sweeps of
///   x_i <- x_i + 1/|F_i| sum_{j in F_i} n_j (n_j . (c_j - x_i)),
/// centroids taken from the previous sweep. Faces with a zero target normal
/// are not counted in F_i; isolated vertices stay put.
TriangleMesh update_vertices(const TriangleMesh& mesh, const NormalField& target_normals, int nv);

struct IterationStats {
  int iteration = 0;
  double e_a = 0.0;
  double e_v = 0.0;
};

struct DenoiseResult {
  TriangleMesh mesh;
  std::vector<IterationStats> trace;  // filled only when a truth mesh is given
  int warnings = 0;
};

using IterationObserver = std::function<void(const IterationStats&)>;

/// N_f rounds of guidance -> guided filtering -> N_v vertex updates.
DenoiseResult gnf_denoise(const TriangleMesh& mesh, const GnfParams& params,
                          const TriangleMesh* truth = nullptr,
                          const IterationObserver& observer = {});

}  // namespace voxnorm::gnf
