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

#include "voxnorm/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace voxnorm::shapes {

TriangleMesh icosahedron(double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& p : v) p = p.normalized() * radius;
  std::vector<Face> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1},
  };
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh icosphere(int subdivisions, double radius) {
  TriangleMesh base = icosahedron(1.0);
  std::vector<Vec3> verts = base.vertices();
  std::vector<Face> faces = base.faces();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back(((verts[a] + verts[b]) * 0.5).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (Vec3& p : verts) p *= radius;
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh box(int n, double size) {
  if (n < 1) throw Error("box: n must be >= 1");
  std::map<std::tuple<int, int, int>, int> index;
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  auto vid = [&](int i, int j, int k) {
    auto [it, inserted] = index.try_emplace({i, j, k}, static_cast<int>(verts.size()));
    if (inserted) {
      verts.emplace_back((static_cast<double>(i) / n - 0.5) * size,
                         (static_cast<double>(j) / n - 0.5) * size,
                         (static_cast<double>(k) / n - 0.5) * size);
    }
    return it->second;
  };
  // Each side: fixed axis `axis` at lattice value `fixed`; (u, v) span the
  // other two axes ordered so that u x v points outward.
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const int fixed = side == 0 ? 0 : n;
      int ua = (axis + 1) % 3;
      int va = (axis + 2) % 3;
      if (side == 0) std::swap(ua, va);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          auto corner = [&](int da, int db) {
            int c[3];
            c[axis] = fixed;
            c[ua] = a + da;
            c[va] = b + db;
            return vid(c[0], c[1], c[2]);
          };
          const int p00 = corner(0, 0), p10 = corner(1, 0), p11 = corner(1, 1), p01 = corner(0, 1);
          if ((a + b) % 2 == 0) {
            faces.push_back({p00, p10, p11});
            faces.push_back({p00, p11, p01});
          } else {
            faces.push_back({p00, p10, p01});
            faces.push_back({p10, p11, p01});
          }
        }
      }
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh plane(int nx, int ny, double spacing) {
  if (nx < 1 || ny < 1) throw Error("plane: grid must be at least 1x1");
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) verts.emplace_back(i * spacing, j * spacing, 0.0);
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if ((i + j) % 2 == 0) {
        faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        faces.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh fold(int n, double angle_deg, double spacing) {
  TriangleMesh flat = plane(n, n, spacing);
  std::vector<Vec3> verts = flat.vertices();
  const double x0 = (n / 2) * spacing;
  const double theta = angle_deg * std::numbers::pi / 180.0;
  for (Vec3& p : verts) {
    if (p.x() <= x0) continue;
    const double dx = p.x() - x0;
    p = Vec3(x0 + dx * std::cos(theta), p.y(), dx * std::sin(theta));
  }
  return flat.with_vertices(std::move(verts));
}

}  // namespace voxnorm::shapes
