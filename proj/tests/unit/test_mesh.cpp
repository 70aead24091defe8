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


#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "voxnorm/mesh.hpp"
#include "voxnorm/mesh_io.hpp"
#include "voxnorm/shapes.hpp"

namespace voxnorm {
namespace {

bool share_vertex(const Face& a, const Face& b) {
  for (int x : a) {
    for (int y : b) {
      if (x == y) return true;
    }
  }
  return false;
}

// Ring growth straight from the face list, quadratic but obviously right.
std::vector<int> ring_oracle(const TriangleMesh& m, int f, int ring) {
  std::set<int> patch{f};
  for (int r = 0; r < ring; ++r) {
    std::set<int> next = patch;
    for (int g = 0; g < static_cast<int>(m.num_faces()); ++g) {
      for (int p : patch) {
        if (share_vertex(m.face(g), m.face(p))) {
          next.insert(g);
          break;
        }
      }
    }
    patch = next;
  }
  return {patch.begin(), patch.end()};
}

TEST(MeshTopology, IcosahedronCounts) {
  const TriangleMesh m = shapes::icosahedron();
  EXPECT_EQ(m.num_vertices(), 12u);
  EXPECT_EQ(m.num_faces(), 20u);
  EXPECT_EQ(m.num_edges(), 30u);
  for (int f = 0; f < 20; ++f) {
    EXPECT_EQ(m.edge_neighbors(f).size(), 3u);
    EXPECT_EQ(m.vertex_neighbors(f).size(), 9u);
  }
  for (int v = 0; v < 12; ++v) EXPECT_EQ(m.vertex_faces(v).size(), 5u);
  for (int e = 0; e < 30; ++e) EXPECT_EQ(m.edge_faces(e).size(), 2u);
}

TEST(MeshTopology, NeighborListsMatchBruteForce) {
  const TriangleMesh m = shapes::icosphere(1);
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    std::vector<int> vn, en;
    for (int g = 0; g < static_cast<int>(m.num_faces()); ++g) {
      if (g == f) continue;
      int shared = 0;
      for (int x : m.face(f)) {
        for (int y : m.face(g)) shared += x == y;
      }
      if (shared >= 1) vn.push_back(g);
      if (shared == 2) en.push_back(g);
    }
    EXPECT_EQ(std::vector<int>(m.vertex_neighbors(f).begin(), m.vertex_neighbors(f).end()), vn);
    EXPECT_EQ(std::vector<int>(m.edge_neighbors(f).begin(), m.edge_neighbors(f).end()), en);
  }
}

TEST(MeshTopology, FaceEdgesFollowWinding) {
  const TriangleMesh m = shapes::box(2);
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    const Face& t = m.face(f);
    for (int k = 0; k < 3; ++k) {
      const auto& e = m.edge(m.face_edges(f)[k]);
      const int a = std::min(t[k], t[(k + 1) % 3]);
      const int b = std::max(t[k], t[(k + 1) % 3]);
      EXPECT_EQ(e[0], a);
      EXPECT_EQ(e[1], b);
    }
  }
}

TEST(MeshTopology, RejectsBadFaces) {
  std::vector<Vec3> v{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()};
  EXPECT_THROW(TriangleMesh(v, {{0, 1, 3}}), Error);
  EXPECT_THROW(TriangleMesh(v, {{0, 1, 1}}), Error);
  EXPECT_THROW(TriangleMesh(v, {{-1, 1, 2}}), Error);
}

TEST(MeshGeometry, NormalsAreOutwardOnClosedShapes) {
  for (const TriangleMesh& m : {shapes::icosphere(2), shapes::box(3)}) {
    for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
      EXPECT_NEAR(m.normal(f).norm(), 1.0, 1e-12);
      EXPECT_GT(m.normal(f).dot(m.centroid(f)), 0.0);
    }
  }
}

TEST(MeshGeometry, DegenerateFaceIsFlagged) {
  std::vector<Vec3> v{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0)};
  const TriangleMesh m(v, {{0, 1, 2}, {0, 1, 3}});
  EXPECT_TRUE(m.is_degenerate(0));
  EXPECT_FALSE(m.is_degenerate(1));
  EXPECT_EQ(m.normal(0), Vec3::Zero());
  EXPECT_EQ(m.degenerate_faces(), std::vector<int>{0});
  const Patch p = build_ring_patch(m, 1, 2);
  EXPECT_EQ(p.members, std::vector<int>{1});
}

TEST(MeshGeometry, RingPatchMatchesOracle) {
  const TriangleMesh m = shapes::icosphere(2);
  for (int f : {0, 17, 101, 319}) {
    for (int r = 0; r <= 3; ++r) EXPECT_EQ(build_ring_patch(m, f, r).members, ring_oracle(m, f, r));
  }
}

TEST(MeshGeometry, PlaneEdgeLengthAndScaling) {
  const int nx = 4, ny = 3;
  const TriangleMesh m = shapes::plane(nx, ny, 0.5);
  const double axis = nx * (ny + 1) + (nx + 1) * ny;
  const double diag = nx * ny;
  const double expected = (axis * 0.5 + diag * 0.5 * std::sqrt(2.0)) / (axis + diag);
  EXPECT_NEAR(average_edge_length(m), expected, 1e-14);

  std::vector<Vec3> scaled;
  for (const Vec3& v : m.vertices()) scaled.push_back(4.0 * v);
  const MeshScales a = compute_scales(m);
  const MeshScales b = compute_scales(m.with_vertices(scaled));
  EXPECT_EQ(b.d_c, 4.0 * a.d_c);
  EXPECT_EQ(b.d_s, 4.0 * a.d_s);
  EXPECT_EQ(b.e_avg, 4.0 * a.e_avg);
  EXPECT_EQ(a.d_s, a.d_c);
}

TEST(MeshGeometry, ScalesNeedAdjacency) {
  std::vector<Vec3> v{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()};
  EXPECT_THROW(compute_scales(TriangleMesh(v, {{0, 1, 2}})), Error);
}

TEST(MeshIo, ObjRoundTripIsExactAt17Digits) {
  const TriangleMesh m = shapes::icosphere(2, 1.2345);
  std::stringstream ss;
  write_obj(ss, m, 17);
  const TriangleMesh r = read_obj(ss);
  EXPECT_EQ(r.vertices(), m.vertices());
  EXPECT_EQ(r.faces(), m.faces());
}

TEST(MeshIo, OffRoundTrip) {
  const TriangleMesh m = shapes::box(2);
  std::stringstream ss;
  write_off(ss, m, 17);
  const TriangleMesh r = read_off(ss);
  EXPECT_EQ(r.vertices(), m.vertices());
  EXPECT_EQ(r.faces(), m.faces());
}

TEST(MeshIo, ObjIgnoresAttributesAndHandlesNegativeIndices) {
  std::istringstream in(
      "# comment\n"
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\n"
      "vt 0 0\nvn 0 0 1\n"
      "f 1/1/1 2/1/1 3/1/1\n"
      "f -3//1 -1//1 -2//1  # trailing comment\n");
  const TriangleMesh m = read_obj(in);
  ASSERT_EQ(m.num_faces(), 2u);
  EXPECT_EQ(m.face(0), (Face{0, 1, 2}));
  EXPECT_EQ(m.face(1), (Face{1, 3, 2}));
}

TEST(MeshIo, OffHeaderOnSameLine) {
  std::istringstream in("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  EXPECT_EQ(read_off(in).num_faces(), 1u);
}

TEST(MeshIo, ErrorsNameTheLine) {
  std::istringstream quad("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 4 3\n");
  try {
    read_obj(quad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "non-triangular face at line 5");
  }
  std::istringstream junk("v 0 0 0\nv 1 x 0\n");
  try {
    read_obj(junk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("parse error at line 2"), std::string::npos);
  }
  EXPECT_THROW(format_from_path("mesh.ply"), Error);
  EXPECT_EQ(format_from_path("A.OBJ"), MeshFormat::kObj);
}

}  // namespace
}  // namespace voxnorm
