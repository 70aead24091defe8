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

#include <memory>
#include <span>
#include <vector>

#include "voxnorm/types.hpp"

namespace voxnorm {

/// Connectivity shared by every mesh that has the same face list. Vertex
/// updates keep topology, so denoising iterations reuse one instance.
struct MeshTopology {
  std::size_t num_vertices = 0;
  std::vector<Face> faces;
  std::vector<std::vector<int>> vertex_faces;
  /// Unique undirected edges, stored with the smaller vertex index first.
  std::vector<std::array<int, 2>> edges;
  std::vector<std::vector<int>> edge_faces;
  /// Edge index for sides (v0,v1), (v1,v2), (v2,v0) of each face.
  std::vector<std::array<int, 3>> face_edges;
  /// Faces sharing an edge, ascending.
  std::vector<std::vector<int>> edge_adjacent;
  /// Faces sharing at least one vertex (self excluded), ascending.
  std::vector<std::vector<int>> vertex_adjacent;

  static std::shared_ptr<const MeshTopology> build(std::size_t num_vertices,
                                                   std::vector<Face> faces);
};

/// Indexed triangle mesh with derived per-face caches.
///
/// The mesh is immutable once constructed and safe to share between
/// concurrent readers. Faces whose area is zero (up to a relative tolerance)
/// are flagged as degenerate: they keep their index but carry a (0,0,0)
/// normal and are left out of every neighborhood.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  /// Same connectivity, new positions. Caches are recomputed.
  TriangleMesh with_vertices(std::vector<Vec3> vertices) const;

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_faces() const { return topology_ ? topology_->faces.size() : 0; }
  std::size_t num_edges() const { return topology_ ? topology_->edges.size() : 0; }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return topology_->faces; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const Face& face(int f) const { return topology_->faces[f]; }

  const Vec3& normal(int f) const { return normals_[f]; }
  const Vec3& centroid(int f) const { return centroids_[f]; }
  double area(int f) const { return areas_[f]; }
  bool is_degenerate(int f) const { return degenerate_mask_[f] != 0; }

  const NormalField& normals() const { return normals_; }
  const std::vector<Vec3>& centroids() const { return centroids_; }
  const std::vector<double>& areas() const { return areas_; }
  const std::vector<int>& degenerate_faces() const { return degenerate_faces_; }

  std::span<const int> vertex_faces(int v) const { return topology_->vertex_faces[v]; }
  std::span<const int> edge_neighbors(int f) const { return topology_->edge_adjacent[f]; }
  std::span<const int> vertex_neighbors(int f) const { return topology_->vertex_adjacent[f]; }
  const std::array<int, 2>& edge(int e) const { return topology_->edges[e]; }
  std::span<const int> edge_faces(int e) const { return topology_->edge_faces[e]; }
  const std::array<int, 3>& face_edges(int f) const { return topology_->face_edges[f]; }

  const std::shared_ptr<const MeshTopology>& topology() const { return topology_; }

  bool same_topology(const TriangleMesh& other) const;

  void check_face_index(int f) const;

 private:
  TriangleMesh(std::vector<Vec3> vertices, std::shared_ptr<const MeshTopology> topology);
  void compute_caches();

  std::vector<Vec3> vertices_;
  std::shared_ptr<const MeshTopology> topology_;
  NormalField normals_;
  std::vector<Vec3> centroids_;
  std::vector<double> areas_;
  std::vector<char> degenerate_mask_;
  std::vector<int> degenerate_faces_;
};

/// Unit normal of triangle (a, b, c) computed from edge differences, or zero
/// when the triangle is degenerate.
Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);

/// Center face plus the faces reached by r rounds of shared-vertex growth.
struct Patch {
  int center = 0;
  int ring = 0;
  std::vector<int> members;  // ascending

  bool contains(int f) const;
};

/// r-ring patch of face `f`. Degenerate faces other than the center are not
/// admitted.
Patch build_ring_patch(const TriangleMesh& mesh, int f, int ring);

struct MeshScales {
  double d_c = 0.0;    // mean distance between edge-adjacent face centroids
  double d_s = 0.0;    // same quantity under the name used for cube sizing
  double e_avg = 0.0;  // mean length over unique edges
};

MeshScales compute_scales(const TriangleMesh& mesh);

double average_edge_length(const TriangleMesh& mesh);

/// Area-weighted vertex normals (zero for isolated vertices).
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

}  // namespace voxnorm
