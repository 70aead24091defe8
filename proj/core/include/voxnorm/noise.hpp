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

#include <cstdint>

#include "voxnorm/mesh.hpp"

namespace voxnorm {

enum class NoiseKind { kGaussian, kImpulsive };

enum class NoiseDirection {
  kVertexNormal,  // area-weighted vertex normal
  kRandom,        // uniformly distributed unit direction per vertex
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  /// Standard deviation as a multiple of the mean edge length.
  double level = 0.0;
  /// Fraction of vertices displaced (impulsive only).
  double impulse_fraction = 0.1;
  std::uint64_t seed = 0;
  NoiseDirection direction = NoiseDirection::kVertexNormal;

  void validate() const;
};

/// Displaces vertices by N(0, (level * e_avg)^2) along the chosen direction.
/// Gaussian noise touches every vertex; impulsive noise touches a seeded
/// subset of round(impulse_fraction * |V|) vertices. Topology is unchanged.
TriangleMesh add_noise(const TriangleMesh& mesh, const NoiseSpec& spec);

}  // namespace voxnorm
