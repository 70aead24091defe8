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

#include "voxnorm/noise.hpp"

#include <cmath>

#include "voxnorm/random.hpp"

namespace voxnorm {

void NoiseSpec::validate() const {
  if (!(level >= 0.0)) throw Error("noise level must be >= 0");
  if (!(impulse_fraction >= 0.0 && impulse_fraction <= 1.0)) {
    throw Error("impulse fraction must lie in [0, 1]");
  }
}

namespace {

Vec3 random_direction(Rng& rng) {
  for (;;) {
    const Vec3 d(rng.normal(), rng.normal(), rng.normal());
    const double len = d.norm();
    if (len > 1e-12) return d / len;
  }
}

}  // namespace

TriangleMesh add_noise(const TriangleMesh& mesh, const NoiseSpec& spec) {
  spec.validate();
  std::vector<Vec3> verts = mesh.vertices();
  if (spec.level == 0.0 || verts.empty()) return mesh.with_vertices(std::move(verts));

  const double sigma = spec.level * average_edge_length(mesh);
  const std::vector<Vec3> normals = vertex_normals(mesh);
  Rng rng(spec.seed);

  auto displace = [&](std::size_t v) {
    const Vec3 dir =
        spec.direction == NoiseDirection::kVertexNormal ? normals[v] : random_direction(rng);
    verts[v] += sigma * rng.normal() * dir;
  };

  if (spec.kind == NoiseKind::kGaussian) {
    for (std::size_t v = 0; v < verts.size(); ++v) displace(v);
  } else {
    const auto count = static_cast<std::size_t>(
        std::llround(spec.impulse_fraction * static_cast<double>(verts.size())));
    for (std::size_t v : rng.sample_without_replacement(verts.size(), count)) displace(v);
  }
  return mesh.with_vertices(std::move(verts));
}

}  // namespace voxnorm
