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

#include "voxnorm/gnf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voxnorm/metrics.hpp"

namespace voxnorm::gnf {

void GnfParams::validate() const {
  if (!(mu_g > 0.0)) throw Error("mu_g must be > 0");
  if (!(mu_d_factor > 0.0)) throw Error("mu_d_factor must be > 0");
  if (nf < 1) throw Error("nf must be >= 1");
  if (nv < 0) throw Error("nv must be >= 0");
  if (neighborhood_ring < 0) throw Error("neighborhood_ring must be >= 0");
  if (!(epsilon > 0.0)) throw Error("epsilon must be > 0");
}

double kernel_g(const Vec3& n_i, const Vec3& n_j, double mu_g) {
  return std::exp(-(n_i - n_j).squaredNorm() / (2.0 * mu_g * mu_g));
}

double kernel_d(const Vec3& c_i, const Vec3& c_j, double mu_d) {
  return std::exp(-(c_i - c_j).squaredNorm() / (2.0 * mu_d * mu_d));
}

double edge_saliency(const TriangleMesh& mesh, const NormalField& normals, int edge) {
  const auto incident = mesh.edge_faces(edge);
  if (incident.size() != 2) return 0.0;
  if (mesh.is_degenerate(incident[0]) || mesh.is_degenerate(incident[1])) return 0.0;
  return (normals[incident[0]] - normals[incident[1]]).norm();
}

double edge_saliency(const TriangleMesh& mesh, int edge) {
  return edge_saliency(mesh, mesh.normals(), edge);
}

Consistency patch_consistency(const TriangleMesh& mesh, const NormalField& normals,
                              const Patch& patch, double epsilon) {
  Consistency out;
  const auto& members = patch.members;
  for (std::size_t a = 0; a < members.size(); ++a) {
    if (mesh.is_degenerate(members[a])) continue;
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      if (mesh.is_degenerate(members[b])) continue;
      out.max_difference =
          std::max(out.max_difference, (normals[members[a]] - normals[members[b]]).norm());
    }
  }

  double max_saliency = 0.0;
  double sum_saliency = 0.0;
  for (int f : members) {
    for (int e : mesh.face_edges(f)) {
      const auto incident = mesh.edge_faces(e);
      if (incident.size() != 2) continue;
      const int other = incident[0] == f ? incident[1] : incident[0];
      // Visit each interior edge once, from its smaller incident face.
      if (other < f || !patch.contains(other)) continue;
      const double s = edge_saliency(mesh, normals, e);
      max_saliency = std::max(max_saliency, s);
      sum_saliency += s;
    }
  }
  out.relative_saliency = max_saliency / (epsilon + sum_saliency);
  out.value = out.max_difference * out.relative_saliency;
  return out;
}

Consistency patch_consistency(const TriangleMesh& mesh, const Patch& patch, double epsilon) {
  return patch_consistency(mesh, mesh.normals(), patch, epsilon);
}

namespace {

Vec3 patch_average(const TriangleMesh& mesh, const NormalField& normals, const Patch& patch,
                   GuidanceAverage average) {
  Vec3 sum = Vec3::Zero();
  for (int g : patch.members) {
    if (mesh.is_degenerate(g)) continue;
    sum += average == GuidanceAverage::kAreaWeighted ? Vec3(mesh.area(g) * normals[g])
                                                     : normals[g];
  }
  return sum;
}

}  // namespace

Guidance compute_guidance(const TriangleMesh& mesh, const NormalField& normals, double epsilon,
                          GuidanceAverage average) {
  const int nf = static_cast<int>(mesh.num_faces());
  std::vector<double> consistency(nf, std::numeric_limits<double>::infinity());
  std::vector<Vec3> averages(nf, Vec3::Zero());
#pragma omp parallel for schedule(dynamic, 64)
  for (int j = 0; j < nf; ++j) {
    if (mesh.is_degenerate(j)) continue;
    const Patch p = build_ring_patch(mesh, j, 1);
    consistency[j] = patch_consistency(mesh, normals, p, epsilon).value;
    averages[j] = patch_average(mesh, normals, p, average);
  }

  Guidance out;
  out.normals.assign(nf, Vec3::Zero());
  out.selected_center.assign(nf, -1);
  int warnings = 0;
#pragma omp parallel for schedule(static) reduction(+ : warnings)
  for (int i = 0; i < nf; ++i) {
    if (mesh.is_degenerate(i)) continue;
    int best = i;
    double best_c = consistency[i];
    for (int j : mesh.vertex_neighbors(i)) {
      if (mesh.is_degenerate(j)) continue;
      // Ascending candidate order: strict comparison keeps the smaller index.
      if (consistency[j] < best_c || (consistency[j] == best_c && j < best)) {
        best_c = consistency[j];
        best = j;
      }
    }
    out.selected_center[i] = best;
    const double len = averages[best].norm();
    if (len > 0.0) {
      out.normals[i] = averages[best] / len;
    } else {
      out.normals[i] = normals[i];
      ++warnings;
    }
  }
  out.warnings = warnings;
  return out;
}

Guidance compute_guidance(const TriangleMesh& mesh, double epsilon, GuidanceAverage average) {
  return compute_guidance(mesh, mesh.normals(), epsilon, average);
}

Vec3 guidance_normal(const TriangleMesh& mesh, int f, double epsilon, GuidanceAverage average) {
  mesh.check_face_index(f);
  if (mesh.is_degenerate(f)) throw Error("guidance_normal: face is degenerate");
  int best = -1;
  double best_c = std::numeric_limits<double>::infinity();
  Vec3 best_avg = Vec3::Zero();
  const Patch own = build_ring_patch(mesh, f, 1);
  for (int j : own.members) {  // ascending, includes f
    const Patch p = build_ring_patch(mesh, j, 1);
    const double c = patch_consistency(mesh, p, epsilon).value;
    if (best < 0 || c < best_c) {
      best = j;
      best_c = c;
      best_avg = patch_average(mesh, mesh.normals(), p, average);
    }
  }
  const double len = best_avg.norm();
  return len > 0.0 ? Vec3(best_avg / len) : mesh.normal(f);
}

std::vector<std::vector<int>> ring_neighborhoods(const TriangleMesh& mesh, int ring) {
  const int nf = static_cast<int>(mesh.num_faces());
  std::vector<std::vector<int>> out(nf);
#pragma omp parallel for schedule(dynamic, 64)
  for (int f = 0; f < nf; ++f) {
    if (mesh.is_degenerate(f)) continue;
    out[f] = build_ring_patch(mesh, f, ring).members;
  }
  return out;
}

Vec3 filter_face_normal(const TriangleMesh& mesh, int f, std::span<const int> neighborhood,
                        const NormalField& guidance, double mu_g, double mu_d, Vec3* raw_sum) {
  Vec3 sum = Vec3::Zero();
  const Vec3& c_i = mesh.centroid(f);
  const Vec3& g_i = guidance[f];
  for (int j : neighborhood) {
    const double w = mesh.area(j) * kernel_d(c_i, mesh.centroid(j), mu_d) *
                     kernel_g(g_i, guidance[j], mu_g);
    sum += w * mesh.normal(j);
  }
  if (raw_sum) *raw_sum = sum;
  const double len = sum.norm();
  return len > 0.0 ? Vec3(sum / len) : Vec3::Zero();
}

FilterResult guided_filter_normals(const TriangleMesh& mesh, const NormalField& guidance,
                                   const GnfParams& params,
                                   const std::vector<std::vector<int>>* neighborhoods) {
  if (guidance.size() != mesh.num_faces()) throw Error("guidance size does not match face count");
  std::vector<std::vector<int>> local;
  if (!neighborhoods) {
    local = ring_neighborhoods(mesh, params.neighborhood_ring);
    neighborhoods = &local;
  }
  const double mu_d = params.mu_d_factor * compute_scales(mesh).d_c;
  const int nf = static_cast<int>(mesh.num_faces());

  FilterResult out;
  out.normals.assign(nf, Vec3::Zero());
  int warnings = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : warnings)
  for (int i = 0; i < nf; ++i) {
    if (mesh.is_degenerate(i)) continue;
    const Vec3 n = filter_face_normal(mesh, i, (*neighborhoods)[i], guidance, params.mu_g, mu_d);
    if (n.isZero(0.0)) {
      out.normals[i] = mesh.normal(i);
      ++warnings;
    } else {
      out.normals[i] = n;
    }
  }
  out.warnings = warnings;
  return out;
}

FilterResult gt_guided_filter_normals(const TriangleMesh& mesh, const NormalField& truth_normals,
                                      const GnfParams& params,
                                      const std::vector<std::vector<int>>* neighborhoods) {
  return guided_filter_normals(mesh, truth_normals, params, neighborhoods);
}

TriangleMesh update_vertices(const TriangleMesh& mesh, const NormalField& target_normals, int nv) {
  if (target_normals.size() != mesh.num_faces()) {
    throw Error("target normal count does not match face count");
  }
  if (nv < 0) throw Error("nv must be >= 0");
  const auto& faces = mesh.faces();
  const int n_vert = static_cast<int>(mesh.num_vertices());
  const int n_face = static_cast<int>(mesh.num_faces());
  std::vector<Vec3> current = mesh.vertices();
  std::vector<Vec3> next(current.size());
  std::vector<Vec3> centroids(n_face);
  for (int sweep = 0; sweep < nv; ++sweep) {
#pragma omp parallel for schedule(static)
    for (int f = 0; f < n_face; ++f) {
      centroids[f] = (current[faces[f][0]] + current[faces[f][1]] + current[faces[f][2]]) / 3.0;
    }
#pragma omp parallel for schedule(static)
    for (int v = 0; v < n_vert; ++v) {
      Vec3 delta = Vec3::Zero();
      int count = 0;
      for (int f : mesh.vertex_faces(v)) {
        const Vec3& n = target_normals[f];
        if (n.isZero(0.0)) continue;
        delta += n * n.dot(centroids[f] - current[v]);
        ++count;
      }
      next[v] = count > 0 ? Vec3(current[v] + delta / count) : current[v];
    }
    std::swap(current, next);
  }
  return mesh.with_vertices(std::move(current));
}

DenoiseResult gnf_denoise(const TriangleMesh& mesh, const GnfParams& params,
                          const TriangleMesh* truth, const IterationObserver& observer) {
  params.validate();
  DenoiseResult result{mesh, {}, 0};
  std::vector<int> degenerate = mesh.degenerate_faces();
  auto neighborhoods = ring_neighborhoods(mesh, params.neighborhood_ring);
  for (int it = 1; it <= params.nf; ++it) {
    const TriangleMesh& current = result.mesh;
    if (current.degenerate_faces() != degenerate) {
      degenerate = current.degenerate_faces();
      neighborhoods = ring_neighborhoods(current, params.neighborhood_ring);
    }
    const Guidance guidance = compute_guidance(current, params.epsilon, params.guidance_average);
    const FilterResult filtered =
        guided_filter_normals(current, guidance.normals, params, &neighborhoods);
    result.warnings += guidance.warnings + filtered.warnings;
    result.mesh = update_vertices(current, filtered.normals, params.nv);
    if (truth) {
      IterationStats stats{it, mean_angular_error(result.mesh, *truth),
                           vertex_l2_error(result.mesh, *truth)};
      result.trace.push_back(stats);
      if (observer) observer(stats);
    }
  }
  return result;
}

}  // namespace voxnorm::gnf
