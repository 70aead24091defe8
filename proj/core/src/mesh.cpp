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

#include "voxnorm/mesh.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_set>

namespace voxnorm {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

// Relative area threshold below which a face counts as zero-area.
constexpr double kDegenerateRelTol = 1e-12;

}  // namespace

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 n = e1.cross(e2);
  const double len = n.norm();
  const double scale = std::max({e1.squaredNorm(), e2.squaredNorm(), (c - b).squaredNorm()});
  if (len == 0.0 || len <= kDegenerateRelTol * scale) return Vec3::Zero();
  return n / len;
}

std::shared_ptr<const MeshTopology> MeshTopology::build(std::size_t num_vertices,
                                                        std::vector<Face> faces) {
  auto topo = std::make_shared<MeshTopology>();
  topo->num_vertices = num_vertices;
  const int nf = static_cast<int>(faces.size());
  for (int f = 0; f < nf; ++f) {
    const Face& t = faces[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || static_cast<std::size_t>(t[k]) >= num_vertices) {
        throw Error("face " + std::to_string(f) + " references vertex " + std::to_string(t[k]) +
                    " out of range [0, " + std::to_string(num_vertices) + ")");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw Error("face " + std::to_string(f) + " repeats a vertex index");
    }
  }
  topo->faces = std::move(faces);

  topo->vertex_faces.assign(num_vertices, {});
  for (int f = 0; f < nf; ++f) {
    for (int v : topo->faces[f]) topo->vertex_faces[v].push_back(f);
  }

  std::map<std::pair<int, int>, int> edge_ids;
  topo->face_edges.resize(nf);
  for (int f = 0; f < nf; ++f) {
    const Face& t = topo->faces[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k];
      int b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_ids.try_emplace({a, b}, static_cast<int>(topo->edges.size()));
      if (inserted) {
        topo->edges.push_back({a, b});
        topo->edge_faces.emplace_back();
      }
      topo->edge_faces[it->second].push_back(f);
      topo->face_edges[f][k] = it->second;
    }
  }

  topo->edge_adjacent.assign(nf, {});
  for (const auto& incident : topo->edge_faces) {
    for (std::size_t i = 0; i < incident.size(); ++i) {
      for (std::size_t j = 0; j < incident.size(); ++j) {
        if (i != j) topo->edge_adjacent[incident[i]].push_back(incident[j]);
      }
    }
  }
  topo->vertex_adjacent.assign(nf, {});
  for (int f = 0; f < nf; ++f) {
    auto& ea = topo->edge_adjacent[f];
    std::sort(ea.begin(), ea.end());
    ea.erase(std::unique(ea.begin(), ea.end()), ea.end());

    auto& va = topo->vertex_adjacent[f];
    for (int v : topo->faces[f]) {
      for (int g : topo->vertex_faces[v]) {
        if (g != f) va.push_back(g);
      }
    }
    std::sort(va.begin(), va.end());
    va.erase(std::unique(va.begin(), va.end()), va.end());
  }
  return topo;
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)) {
  topology_ = MeshTopology::build(vertices_.size(), std::move(faces));
  compute_caches();
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::shared_ptr<const MeshTopology> topology)
    : vertices_(std::move(vertices)), topology_(std::move(topology)) {
  compute_caches();
}

TriangleMesh TriangleMesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) {
    throw Error("with_vertices: expected " + std::to_string(vertices_.size()) + " vertices, got " +
                std::to_string(vertices.size()));
  }
  return TriangleMesh(std::move(vertices), topology_);
}

bool TriangleMesh::same_topology(const TriangleMesh& other) const {
  if (topology_ == other.topology_) return true;
  return num_vertices() == other.num_vertices() && faces() == other.faces();
}

void TriangleMesh::check_face_index(int f) const {
  if (f < 0 || static_cast<std::size_t>(f) >= num_faces()) {
    throw Error("face index " + std::to_string(f) + " out of range [0, " +
                std::to_string(num_faces()) + ")");
  }
}

void TriangleMesh::compute_caches() {
  const std::size_t nf = num_faces();
  normals_.assign(nf, Vec3::Zero());
  centroids_.assign(nf, Vec3::Zero());
  areas_.assign(nf, 0.0);
  degenerate_mask_.assign(nf, 0);
  degenerate_faces_.clear();
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& t = topology_->faces[f];
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    centroids_[f] = (a + b + c) / 3.0;
    const Vec3 n = triangle_normal(a, b, c);
    if (n.isZero(0.0)) {
      degenerate_mask_[f] = 1;
      degenerate_faces_.push_back(static_cast<int>(f));
      continue;
    }
    normals_[f] = n;
    areas_[f] = 0.5 * (b - a).cross(c - a).norm();
  }
}

bool Patch::contains(int f) const {
  return std::binary_search(members.begin(), members.end(), f);
}

Patch build_ring_patch(const TriangleMesh& mesh, int f, int ring) {
  mesh.check_face_index(f);
  if (ring < 0) throw Error("ring must be non-negative");
  Patch patch;
  patch.center = f;
  patch.ring = ring;

  std::unordered_set<int> seen{f};
  std::vector<int> frontier{f};
  std::vector<int> members{f};
  for (int r = 0; r < ring && !frontier.empty(); ++r) {
    std::vector<int> next;
    for (int g : frontier) {
      for (int h : mesh.vertex_neighbors(g)) {
        if (mesh.is_degenerate(h)) continue;
        if (seen.insert(h).second) {
          next.push_back(h);
          members.push_back(h);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(members.begin(), members.end());
  patch.members = std::move(members);
  return patch;
}

MeshScales compute_scales(const TriangleMesh& mesh) {
  // Centroid differences are formed from vertex differences so the result is
  // unchanged by translations under which those differences are exact.
  std::vector<double> dists;
  dists.reserve(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto incident = mesh.edge_faces(static_cast<int>(e));
    for (std::size_t i = 0; i < incident.size(); ++i) {
      for (std::size_t j = i + 1; j < incident.size(); ++j) {
        const int fi = incident[i];
        const int fj = incident[j];
        if (mesh.is_degenerate(fi) || mesh.is_degenerate(fj)) continue;
        const Face& ti = mesh.face(fi);
        const Face& tj = mesh.face(fj);
        const Vec3& origin = mesh.vertex(tj[0]);
        const Vec3 sum_i = (mesh.vertex(ti[0]) - origin) + (mesh.vertex(ti[1]) - origin) +
                           (mesh.vertex(ti[2]) - origin);
        const Vec3 sum_j = (mesh.vertex(tj[1]) - origin) + (mesh.vertex(tj[2]) - origin);
        dists.push_back(((sum_i - sum_j) / 3.0).norm());
      }
    }
  }
  if (dists.empty()) throw Error("no adjacent face pairs");
  MeshScales scales;
  scales.d_c = pairwise_mean(dists);
  scales.d_s = scales.d_c;
  scales.e_avg = average_edge_length(mesh);
  return scales;
}

double average_edge_length(const TriangleMesh& mesh) {
  std::vector<double> lengths(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ev = mesh.edge(static_cast<int>(e));
    lengths[e] = (mesh.vertex(ev[1]) - mesh.vertex(ev[0])).norm();
  }
  return pairwise_mean(lengths);
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> out(mesh.num_vertices(), Vec3::Zero());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    Vec3 sum = Vec3::Zero();
    for (int f : mesh.vertex_faces(static_cast<int>(v))) sum += mesh.area(f) * mesh.normal(f);
    const double len = sum.norm();
    if (len > 0.0) out[v] = sum / len;
  }
  return out;
}

}  // namespace voxnorm
