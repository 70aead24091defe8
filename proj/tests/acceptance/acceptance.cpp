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


// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
//   voxnorm_acceptance            all criteria in order
//   voxnorm_acceptance --only N   criterion N

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "voxnorm/adam.hpp"
#include "voxnorm/config.hpp"
#include "voxnorm/gnf.hpp"
#include "voxnorm/metrics.hpp"
#include "voxnorm/noise.hpp"
#include "voxnorm/pipeline.hpp"
#include "voxnorm/shapes.hpp"
#include "voxnorm/training.hpp"
#include "voxnorm/triangle_box.hpp"
#include "voxnorm/voxelizer.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace {

using namespace voxnorm;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

TriangleMesh with_noise(const TriangleMesh& m, double level, std::uint64_t seed) {
  NoiseSpec s;
  s.level = level;
  s.seed = seed;
  return add_noise(m, s);
}

Outcome filter_oracle() {
  const std::vector<TriangleMesh> fixtures{
      with_noise(shapes::icosphere(1), 0.2, 1), with_noise(shapes::box(2), 0.1, 2),
      with_noise(shapes::plane(7, 7), 0.3, 3), with_noise(shapes::fold(8, 50), 0.2, 4),
      with_noise(shapes::icosahedron(), 0.1, 5)};
  double worst = 0.0;
  std::size_t faces = 0;
  Rng rng(77);
  for (const TriangleMesh& m : fixtures) {
    if (m.num_faces() > 200) return {false, "fixture larger than 200 faces"};
    NormalField guide(m.num_faces());
    for (Vec3& g : guide) g = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    gnf::GnfParams p;
    p.mu_g = 0.35;
    const NormalField got = gnf::guided_filter_normals(m, guide, p).normals;
    const NormalField want = oracle::naive_guided_filter(m, guide, p.mu_g);
    for (std::size_t f = 0; f < m.num_faces(); ++f) {
      worst = std::max(worst, (got[f] - want[f]).cwiseAbs().maxCoeff());
    }
    faces += m.num_faces();
  }
  return {worst <= 1e-12, std::to_string(faces) + " faces, max component diff " + fmt("%.3g", worst)};
}

Outcome voxelization() {
  std::ostringstream d;
  bool ok = true;
  const TriangleMesh m = oracle::dyadic(with_noise(shapes::icosphere(3), 0.2, 6));
  VoxelParams params;
  params.half_extent = 20;
  const FaceVoxelizer vox(m, params);
  const VolumetricGrid g = vox.voxelize(0);
  const bool shape_ok = g.side() == 41 && g.labels.size() == 41u * 41 * 41 * 3;
  ok &= shape_ok;
  d << "grid " << g.side() << "^3x3 " << (shape_ok ? "ok" : "WRONG");

  const TriangleMesh moved = oracle::translated(m, Vec3(0.5, -2.25, 7.125));
  const FaceVoxelizer vox_moved(moved, params);
  int identical = 0;
  const std::vector<int> faces{0, 100, 517, 1279};
  for (int f : faces) identical += vox.voxelize(f).labels == vox_moved.voxelize(f).labels;
  ok &= identical == static_cast<int>(faces.size());
  d << "; translated grids identical " << identical << "/" << faces.size();

  Rng rng(21);
  int contradictions = 0, confirmed = 0;
  for (int i = 0; i < 10000; ++i) {
    std::array<Vec3, 3> tri;
    const Vec3 base(rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5);
    for (Vec3& p : tri) p = base + 0.6 * Vec3(rng.normal(), rng.normal(), rng.normal());
    const Vec3 c(0.4 * (rng.uniform() - 0.5), 0.4 * (rng.uniform() - 0.5), 0.4 * (rng.uniform() - 0.5));
    const double h = 0.05 + 0.45 * rng.uniform();
    const bool sat = triangle_box_overlap(tri, c, h);
    if (oracle::sampled_point_in_box(tri, c, h, 10000, rng)) {
      ++confirmed;
      contradictions += !sat;
    }
  }
  ok &= contradictions == 0;
  d << "; SAT contradictions " << contradictions << " (" << confirmed << " sampled hits)";
  return {ok, d.str()};
}

Outcome gradient_check() {
  nn::Network<double> net(oracle::tiny_spec());
  net.initialize(4, 0.5);
  Rng rng(5);
  const Tensor<double> x = oracle::random_tensor({4, 3, 4, 4, 4}, rng);
  const Tensor<double> t = oracle::random_tensor({4, 6}, rng, 0.5);
  const oracle::GradCheck r = oracle::check_gradients(net, x, t);
  return {r.worst < 1e-3, std::to_string(r.checked) + " entries, worst relative error " +
                              fmt("%.3g", r.worst) + " at " + r.worst_param};
}

Outcome overfit() {
  const TriangleMesh box = shapes::box(6);
  const TriangleMesh fold_a = shapes::fold(10, 35);
  const TriangleMesh fold_b = shapes::fold(10, 65);
  const std::vector<TriangleMesh> noisy{with_noise(box, 0.2, 5), with_noise(fold_a, 0.1, 6),
                                        with_noise(fold_b, 0.1, 7)};
  const std::vector<pipeline::MeshPair> pairs{
      {&noisy[0], &box}, {&noisy[1], &fold_a}, {&noisy[2], &fold_b}};
  pipeline::TrainingSetOptions data;
  data.quota = 4;
  data.seed = 3;
  pipeline::TrainingSet set = pipeline::build_training_set(pairs, data);
  if (set.tuples.size() < 8) return {false, "only " + std::to_string(set.tuples.size()) + " tuples"};
  set.tuples.resize(8);

  nn::Network<float> net(nn::build_normalnet_spec(6));
  net.initialize(1);
  nn::AdamOptimizer<float> opt;
  const MemoryTupleSource source(set.tuples);
  nn::TrainOptions train;
  train.epochs = 2000;
  train.batch = 8;
  train.max_steps = 2000;
  train.target_loss = 1e-2;
  train.progress = [](const nn::TrainProgress& p) {
    if (p.step % 50 == 0) std::fprintf(stderr, "  overfit step %llu loss %.5f\n", static_cast<unsigned long long>(p.step), p.loss);
  };
  const nn::TrainReport r = nn::train_network(net, opt, source, train);
  return {r.reached_target, std::to_string(r.steps) + " Adam steps, loss " + fmt("%.5f", r.last_loss)};
}

Outcome classical_gnf() {
  const TriangleMesh truth = shapes::icosphere(3);
  const TriangleMesh noisy = with_noise(truth, 0.2, 42);
  gnf::GnfParams p;
  p.mu_g = 0.3;
  p.nf = 5;
  p.nv = 10;
  const TriangleMesh out = gnf::gnf_denoise(noisy, p).mesh;
  const double ea0 = mean_angular_error(noisy, truth), ea1 = mean_angular_error(out, truth);
  const double ev0 = vertex_l2_error(noisy, truth), ev1 = vertex_l2_error(out, truth);
  const double reduction = 1.0 - ea1 / ea0;
  std::ostringstream d;
  d << truth.num_faces() << " faces, E_a " << fmt("%.3f", ea0) << " -> " << fmt("%.3f", ea1) << " ("
    << fmt("%.1f", 100 * reduction) << "% lower), E_v " << fmt("%.5f", ev0) << " -> " << fmt("%.5f", ev1);
  return {reduction >= 0.40 && ev1 < ev0, d.str()};
}

Outcome clean_cube_targets() {
  const TriangleMesh cube = shapes::box(4);
  const std::vector<double>& list = nn::default_mu_g_list();
  const pipeline::TargetGenerator gen(cube, cube.normals());
  double worst = 0.0, worst_mu = 0.0;
  std::vector<double> per_mu(list.size(), 0.0);
  for (int f = 0; f < static_cast<int>(cube.num_faces()); ++f) {
    const std::vector<Vec3> t = gen.targets(f, list);
    for (std::size_t k = 0; k < list.size(); ++k) {
      const double a = angle_between_deg(t[k], cube.normal(f));
      per_mu[k] = std::max(per_mu[k], a);
      if (a > worst) worst = a, worst_mu = list[k];
    }
  }
  std::ostringstream d;
  d << cube.num_faces() << " faces, worst deviation " << fmt("%.3g", worst) << " deg at mu_g "
    << worst_mu << " (per mu_g:";
  for (double a : per_mu) d << " " << fmt("%.2g", a);
  d << ")";
  return {worst < 1e-6, d.str()};
}

Outcome toy_learned() {
  const std::vector<TriangleMesh> truth{shapes::icosphere(2), shapes::box(4)};
  const std::vector<TriangleMesh> noisy{with_noise(truth[0], 0.2, 1), with_noise(truth[1], 0.2, 2)};
  pipeline::IterativeTrainingOptions o;
  o.stages = 3;
  o.seed = 7;
  o.data.quota = 200;
  o.data.voxel.half_extent = 8;
  o.data.voxel.alpha_c = 4.0;
  o.train.epochs = 50;
  o.train.batch = 80;
  o.log = [](const std::string& s) { std::fprintf(stderr, "  %s\n", s.c_str()); };
  const pipeline::WeightSet weights = pipeline::train_iterative(noisy, truth, o);

  pipeline::LearnedParams lp;
  lp.nf = 3;
  lp.voxel = o.data.voxel;
  std::ostringstream d;
  bool ok = true;
  for (std::size_t m = 0; m < truth.size(); ++m) {
    const TriangleMesh held_out = with_noise(truth[m], 0.2, 99 + m);
    const TriangleMesh out = pipeline::denoise_learned(held_out, weights, o.spec, lp).mesh;
    const double before = mean_angular_error(held_out, truth[m]);
    const double after = mean_angular_error(out, truth[m]);
    ok &= after < before;
    d << (m ? "; " : "") << (m ? "box" : "sphere") << " E_a " << fmt("%.3f", before) << " -> "
      << fmt("%.3f", after);
  }
  return {ok, d.str()};
}

struct Model {
  const char* name;
  int nf, nv;
  double mu_g;
};

Outcome table_fidelity() {
  const int cnn[25] = {1, 2, 3, 4, 4, 5, 5, 5, 5, 5, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6, 6};
  int cnn_ok = 0;
  for (int it = 1; it <= 25; ++it) cnn_ok += pipeline::select_cnn(it, 25) == cnn[it - 1];

  const Model expected[] = {
      {"Fandisk", 10, 20, 0.25}, {"Table", 15, 15, 0.4},      {"Joint", 5, 15, 0.25},
      {"Twelve", 25, 10, 0.3},   {"Block", 20, 30, 0.3},      {"Bunny", 2, 5, 0.3},
      {"Angel", 3, 4, 0.3},      {"Iron", 10, 10, 0.35},      {"Pierrot", 10, 10, 0.35},
      {"Rocker-arm", 10, 10, 0.25}, {"Eagle", 4, 5, 0.4},     {"Gargoyle", 5, 10, 0.3},
      {"BallJoint", 4, 10, 0.4}, {"Boy01F", 14, 20, 0.4},     {"Boy02F", 7, 20, 0.35},
      {"Cone04V1", 20, 20, 0.45}, {"Girl02V1", 15, 20, 0.45}, {"Cone16V2", 10, 10, 0.3},
      {"Girl01V2", 3, 15, 0.4}};
  const std::vector<ModelSetting> models =
      load_model_table(std::filesystem::path(VOXNORM_CONFIG_DIR) / "models.json");
  int model_ok = 0;
  for (const Model& e : expected) {
    model_ok += find_model(models, e.name) == ModelSetting{e.name, e.nf, e.nv, e.mu_g};
  }
  const bool round_trip = parse_model_table(model_table_to_json(models)) == models;
  std::ostringstream d;
  d << "select_cnn " << cnn_ok << "/25, models " << model_ok << "/19 of " << models.size()
    << " listed, round trip " << (round_trip ? "ok" : "FAILED");
  return {cnn_ok == 25 && model_ok == 19 && models.size() == 19 && round_trip, d.str()};
}

Outcome metric_identities() {
  const std::vector<TriangleMesh> fixtures{
      shapes::icosahedron(), shapes::icosphere(3), shapes::box(5), shapes::plane(9, 9),
      shapes::fold(10, 70), with_noise(shapes::icosphere(2), 0.3, 9)};
  int zero = 0;
  for (const TriangleMesh& m : fixtures) {
    zero += mean_angular_error(m, m) == 0.0 && vertex_l2_error(m, m) == 0.0;
  }
  const TriangleMesh plane = shapes::plane(9, 9, 0.25);
  double worst = 0.0;
  for (double off : {0.375, 0.1, 1.7}) {
    worst = std::max(worst, std::abs(vertex_l2_error(oracle::translated(plane, Vec3(0, 0, off)), plane) - off));
  }
  std::ostringstream d;
  d << "zero self-error on " << zero << "/" << fixtures.size() << " fixtures, plane offset error "
    << fmt("%.3g", worst);
  return {zero == static_cast<int>(fixtures.size()) && worst <= 1e-9, d.str()};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxnorm acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "bilateral filter oracle", 10, filter_oracle},
      {2, "voxelization shape and invariance", 60, voxelization},
      {3, "gradient check", 60, gradient_check},
      {4, "overfit sanity", 1800, overfit},
      {5, "classical GNF improvement", 120, classical_gnf},
      {6, "clean cube targets", 10, clean_cube_targets},
      {7, "toy learned pipeline", 7200, toy_learned},
      {8, "table-driven config fidelity", 10, table_fidelity},
      {9, "metric identities", 60, metric_identities},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %d (%s): %s  %s  [%.1f s / %.0f s%s]\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : ", over limit");
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
