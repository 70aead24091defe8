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

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the library's algorithms.

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "voxnorm/mesh.hpp"
#include "voxnorm/random.hpp"

namespace voxnorm::oracle {

inline bool faces_share(const TriangleMesh& m, int a, int b, int need) {
  int c = 0;
  for (int x : m.face(a)) {
    for (int y : m.face(b)) c += x == y;
  }
  return c >= need;
}

// Bilateral normal filter evaluated by a plain double loop over all face
// pairs. Neighborhoods, centroids, areas and mu_d are rebuilt from scratch.
inline NormalField naive_guided_filter(const TriangleMesh& m, const NormalField& guide, double mu_g,
                                       double mu_d_factor = 2.0, int ring_count = 2) {
  const int nf = static_cast<int>(m.num_faces());
  std::vector<Vec3> centroid(nf), normal(nf);
  std::vector<double> area(nf);
  for (int f = 0; f < nf; ++f) {
    const Vec3 &a = m.vertex(m.face(f)[0]), &b = m.vertex(m.face(f)[1]), &c = m.vertex(m.face(f)[2]);
    centroid[f] = (a + b + c) / 3.0;
    const Vec3 cr = (b - a).cross(c - a);
    area[f] = 0.5 * cr.norm();
    normal[f] = cr.normalized();
  }
  double dsum = 0.0;
  int dcount = 0;
  for (int i = 0; i < nf; ++i) {
    for (int j = i + 1; j < nf; ++j) {
      if (faces_share(m, i, j, 2)) {
        dsum += (centroid[i] - centroid[j]).norm();
        ++dcount;
      }
    }
  }
  const double mu_d = mu_d_factor * dsum / dcount;
  NormalField out(nf);
  for (int i = 0; i < nf; ++i) {
    std::set<int> ring{i};
    for (int r = 0; r < ring_count; ++r) {
      std::set<int> next = ring;
      for (int j = 0; j < nf; ++j) {
        for (int p : ring) {
          if (faces_share(m, j, p, 1)) next.insert(j);
        }
      }
      ring = next;
    }
    Vec3 sum = Vec3::Zero();
    for (int j = 0; j < nf; ++j) {
      if (!ring.count(j)) continue;
      const double gd = std::exp(-(centroid[i] - centroid[j]).squaredNorm() / (2 * mu_d * mu_d));
      const double gg = std::exp(-(guide[i] - guide[j]).squaredNorm() / (2 * mu_g * mu_g));
      sum += area[j] * gd * gg * normal[j];
    }
    out[i] = sum.normalized();
  }
  return out;
}

// True when some of `samples` barycentric points of the triangle fall
// strictly inside the box. A hit proves overlap.
inline bool sampled_point_in_box(const std::array<Vec3, 3>& tri, const Vec3& center, double h,
                                 int samples, Rng& rng) {
  for (int s = 0; s < samples; ++s) {
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3 p = tri[0] + u * (tri[1] - tri[0]) + v * (tri[2] - tri[0]);
    if (((p - center).array().abs() < h).all()) return true;
  }
  return false;
}

// Exact overlap by clipping the triangle against the six box slabs.
inline bool clipped_overlap(const std::array<Vec3, 3>& tri, const Vec3& center, double h) {
  std::vector<Vec3> poly(tri.begin(), tri.end());
  for (int axis = 0; axis < 3; ++axis) {
    for (int side : {-1, 1}) {
      const double bound = center[axis] + side * h;
      auto inside = [&](const Vec3& p) { return side * (p[axis] - bound) <= 0.0; };
      std::vector<Vec3> next;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec3& a = poly[i];
        const Vec3& b = poly[(i + 1) % poly.size()];
        if (inside(a)) next.push_back(a);
        if (inside(a) != inside(b)) {
          const double t = (bound - a[axis]) / (b[axis] - a[axis]);
          next.push_back(a + t * (b - a));
        }
      }
      poly = std::move(next);
      if (poly.empty()) return false;
    }
  }
  return true;
}

// Copy of `m` with every coordinate rounded to a multiple of 2^-20, so sums
// with small dyadic offsets are exact.
inline TriangleMesh dyadic(const TriangleMesh& m) {
  std::vector<Vec3> v = m.vertices();
  for (Vec3& p : v) {
    for (int k = 0; k < 3; ++k) p[k] = std::ldexp(std::round(std::ldexp(p[k], 20)), -20);
  }
  return m.with_vertices(std::move(v));
}

inline TriangleMesh translated(const TriangleMesh& m, const Vec3& t) {
  std::vector<Vec3> v = m.vertices();
  for (Vec3& p : v) p += t;
  return m.with_vertices(std::move(v));
}

}  // namespace voxnorm::oracle
