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

#include "voxnorm/mesh.hpp"

// Procedural fixtures used by tests, benchmarks and the toy training corpus.
namespace voxnorm::shapes {

TriangleMesh icosahedron(double radius = 1.0);

/// Loop-style midpoint subdivision of the icosahedron projected to the
/// sphere: 20 * 4^subdivisions faces.
TriangleMesh icosphere(int subdivisions, double radius = 1.0);

/// Closed axis-aligned cube of side `size` centered at the origin, each side
/// split into an n x n grid of squares with alternating diagonals.
TriangleMesh box(int n, double size = 1.0);

/// Open rectangular grid in the z = 0 plane, nx x ny squares of side
/// `spacing`, lower-left corner at the origin.
TriangleMesh plane(int nx, int ny, double spacing = 1.0);

/// Open two-sided fold: a plane(n, n) whose x > n/2 half is rotated about the
/// fold line so the two sides' normals differ by `angle_deg`.
TriangleMesh fold(int n, double angle_deg, double spacing = 1.0);

}  // namespace voxnorm::shapes
