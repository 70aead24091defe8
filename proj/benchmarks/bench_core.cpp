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


#include <benchmark/benchmark.h>

#include "voxnorm/gnf.hpp"
#include "voxnorm/network.hpp"
#include "voxnorm/noise.hpp"
#include "voxnorm/random.hpp"
#include "voxnorm/shapes.hpp"
#include "voxnorm/triangle_box.hpp"
#include "voxnorm/voxelizer.hpp"

namespace {

using namespace voxnorm;

TriangleMesh noisy_sphere(int subdiv) {
  NoiseSpec s;
  s.level = 0.2;
  s.seed = 1;
  return add_noise(shapes::icosphere(subdiv), s);
}

void BM_TriangleBox(benchmark::State& state) {
  Rng rng(1);
  std::vector<std::array<Vec3, 3>> tris(1024);
  for (auto& t : tris) {
    for (Vec3& p : t) p = Vec3(rng.normal(), rng.normal(), rng.normal());
  }
  std::size_t i = 0;
  int hits = 0;
  for (auto _ : state) {
    hits += triangle_box_overlap(tris[i++ & 1023], Vec3::Zero(), 0.5);
  }
  benchmark::DoNotOptimize(hits);
}
BENCHMARK(BM_TriangleBox);

void BM_VoxelizeFace(benchmark::State& state) {
  const TriangleMesh m = noisy_sphere(3);
  VoxelParams p;
  p.half_extent = static_cast<int>(state.range(0));
  const FaceVoxelizer vox(m, p);
  int f = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vox.voxelize(f));
    f = (f + 37) % static_cast<int>(m.num_faces());
  }
}
BENCHMARK(BM_VoxelizeFace)->Arg(8)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_GuidedFilter(benchmark::State& state) {
  const TriangleMesh m = noisy_sphere(static_cast<int>(state.range(0)));
  const gnf::Guidance g = gnf::compute_guidance(m, 1e-9);
  gnf::GnfParams p;
  for (auto _ : state) benchmark::DoNotOptimize(gnf::guided_filter_normals(m, g.normals, p));
  state.SetItemsProcessed(state.iterations() * m.num_faces());
}
BENCHMARK(BM_GuidedFilter)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GnfDenoise(benchmark::State& state) {
  const TriangleMesh m = noisy_sphere(3);
  gnf::GnfParams p;
  p.nf = 5;
  p.nv = 10;
  for (auto _ : state) benchmark::DoNotOptimize(gnf::gnf_denoise(m, p));
}
BENCHMARK(BM_GnfDenoise)->Unit(benchmark::kMillisecond);

void BM_NetworkForward(benchmark::State& state) {
  nn::Network<float> net(nn::build_normalnet_spec(6));
  net.initialize(1);
  const int side = static_cast<int>(state.range(0));
  Tensor<float> x({static_cast<int>(state.range(1)), 3, side, side, side});
  Rng rng(2);
  for (float& v : x.data) v = static_cast<float>(rng.normal());
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x, nn::Mode::kInference));
  state.SetItemsProcessed(state.iterations() * x.batch());
}
BENCHMARK(BM_NetworkForward)->Args({17, 8})->Args({41, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
