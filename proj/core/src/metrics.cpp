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

#include "voxnorm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

namespace voxnorm {

double angle_between_deg(const Vec3& a, const Vec3& b) {
  // FMA contraction can leave a x a slightly nonzero.
  if (a == b) return 0.0;
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

double mean_angular_error(const NormalField& estimate, const NormalField& truth,
                          AngularErrorMode mode) {
  if (estimate.size() != truth.size()) throw Error("normal field size mismatch");
  std::vector<double> angles;
  angles.reserve(estimate.size());
  for (std::size_t f = 0; f < estimate.size(); ++f) {
    if (estimate[f].isZero(0.0) || truth[f].isZero(0.0)) continue;
    const double deg = angle_between_deg(estimate[f], truth[f]);
    angles.push_back(mode == AngularErrorMode::kMean ? deg : deg * deg);
  }
  return pairwise_mean(angles);
}

double mean_angular_error(const TriangleMesh& denoised, const TriangleMesh& truth,
                          AngularErrorMode mode) {
  if (!denoised.same_topology(truth)) {
    throw Error("topology mismatch: meshes must share face count and face index triples");
  }
  return mean_angular_error(denoised.normals(), truth.normals(), mode);
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = va + vb + vc;
  if (denom == 0.0) {
    // Collinear triangle that slipped past the region tests: best of the edges.
    Vec3 best = a;
    double best_d = (p - a).squaredNorm();
    auto try_segment = [&](const Vec3& s, const Vec3& e) {
      const Vec3 d = e - s;
      const double len2 = d.squaredNorm();
      const double t = len2 > 0.0 ? std::clamp((p - s).dot(d) / len2, 0.0, 1.0) : 0.0;
      const Vec3 q = s + t * d;
      const double dq = (p - q).squaredNorm();
      if (dq < best_d) {
        best_d = dq;
        best = q;
      }
    };
    try_segment(a, b);
    try_segment(b, c);
    try_segment(c, a);
    return best;
  }
  const double v = vb / denom;
  const double w = vc / denom;
  return a + ab * v + ac * w;
}

double vertex_l2_error(const TriangleMesh& denoised, const TriangleMesh& truth) {
  if (truth.num_faces() == 0) throw Error("vertex_l2_error: empty truth mesh");
  if (denoised.num_vertices() == 0) throw Error("vertex_l2_error: empty denoised mesh");
  const int nv = static_cast<int>(denoised.num_vertices());
  std::vector<double> sq(nv, 0.0);
#pragma omp parallel for schedule(dynamic, 64)
  for (int v = 0; v < nv; ++v) {
    const Vec3& p = denoised.vertex(v);
    double best = std::numeric_limits<double>::infinity();
    for (const Face& f : truth.faces()) {
      const Vec3 q =
          closest_point_on_triangle(p, truth.vertex(f[0]), truth.vertex(f[1]), truth.vertex(f[2]));
      best = std::min(best, (p - q).squaredNorm());
    }
    sq[v] = best;
  }
  return std::sqrt(pairwise_mean(sq));
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["e_a"] = e_a;
  j["e_v"] = e_v;
  j["faces"] = faces;
  j["vertices"] = vertices;
  return j.dump(2);
}

MetricReport evaluate(const TriangleMesh& denoised, const TriangleMesh& truth) {
  MetricReport r;
  r.e_a = mean_angular_error(denoised, truth);
  r.e_v = vertex_l2_error(denoised, truth);
  r.faces = denoised.num_faces();
  r.vertices = denoised.num_vertices();
  return r;
}

}  // namespace voxnorm
