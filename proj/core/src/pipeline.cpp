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


#include "voxnorm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "voxnorm/metrics.hpp"
#include "voxnorm/random.hpp"
#include "voxnorm/weights_io.hpp"

namespace voxnorm::pipeline {

const char* to_string(FaceCategory c) {
  switch (c) {
    case FaceCategory::kV1: return "v1";
    case FaceCategory::kV2: return "v2";
    case FaceCategory::kV3: return "v3";
    case FaceCategory::kV4: return "v4";
  }
  return "?";
}

double max_patch_angle(const TriangleMesh& mesh, int f, int ring) {
  mesh.check_face_index(f);
  const Patch patch = build_ring_patch(mesh, f, ring);
  std::vector<const Vec3*> normals;
  for (int g : patch.members) {
    if (!mesh.is_degenerate(g)) normals.push_back(&mesh.normal(g));
  }
  // The largest angle is the smallest dot product.
  double min_dot = 1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    for (std::size_t j = i + 1; j < normals.size(); ++j) {
      const double d = normals[i]->dot(*normals[j]);
      if (d < min_dot) {
        min_dot = d;
        bi = i;
        bj = j;
      }
    }
  }
  if (bi == bj) return 0.0;
  return angle_between_deg(*normals[bi], *normals[bj]);
}

FaceCategory category_from_angle(double a_p) {
  if (a_p > 80.0) return FaceCategory::kV1;
  if (a_p > 50.0) return FaceCategory::kV2;
  if (a_p > 20.0) return FaceCategory::kV3;
  return FaceCategory::kV4;
}

FaceCategory categorize_face(const TriangleMesh& mesh, int f) {
  mesh.check_face_index(f);
  if (mesh.is_degenerate(f)) throw Error("cannot categorize a degenerate face");
  return category_from_angle(max_patch_angle(mesh, f, 2));
}

int select_cnn(int iteration, int nf) {
  if (nf < 1 || iteration < 1 || iteration > nf) {
    throw Error("iteration " + std::to_string(iteration) + " outside [1, " + std::to_string(nf) + "]");
  }
  if (iteration <= 3) return iteration;
  if (iteration <= 5) return 4;
  if (iteration <= 10) return 5;
  return 6;
}

StagePlan StagePlan::make(int nf) {
  if (nf < 0) throw Error("N_f must be >= 0");
  StagePlan plan;
  plan.nf = nf;
  for (int it = 1; it <= nf; ++it) plan.cnn_for_iteration.push_back(select_cnn(it, nf));
  return plan;
}

int StagePlan::cnn_count() const {
  return cnn_for_iteration.empty() ? 0 : cnn_for_iteration.back();
}

int head_index(std::span<const double> mu_g_list, double mu_g) {
  for (std::size_t i = 0; i < mu_g_list.size(); ++i) {
    if (mu_g_list[i] == mu_g) return static_cast<int>(i);
  }
  throw Error("mu_g = " + std::to_string(mu_g) + " is not one of the network's heads");
}

// ---------------------------------------------------------------------------

TargetGenerator::TargetGenerator(const TriangleMesh& mesh, const NormalField& truth_normals,
                                 gnf::GnfParams params)
    : mesh_(mesh), truth_(truth_normals), params_(params) {
  params_.validate();
  if (truth_.size() != mesh_.num_faces()) throw Error("truth normals do not match the mesh faces");
  mu_d_ = params_.mu_d_factor * compute_scales(mesh_).d_c;
  neighborhoods_ = gnf::ring_neighborhoods(mesh_, params_.neighborhood_ring);
}

std::vector<Vec3> TargetGenerator::targets(int f, std::span<const double> mu_g_list) const {
  mesh_.check_face_index(f);
  std::vector<Vec3> out;
  out.reserve(mu_g_list.size());
  for (double mu_g : mu_g_list) {
    const Vec3 n = gnf::filter_face_normal(mesh_, f, neighborhoods_[f], truth_, mu_g, mu_d_);
    if (n.isZero()) {
#pragma omp atomic
      ++warnings_;
      out.push_back(mesh_.normal(f));
    } else {
      out.push_back(n);
    }
  }
  return out;
}

std::vector<Vec3> make_targets(const TriangleMesh& mesh, const NormalField& truth_normals, int f,
                               std::span<const double> mu_g_list, const gnf::GnfParams& params) {
  return TargetGenerator(mesh, truth_normals, params).targets(f, mu_g_list);
}

TrainingSet build_training_set(std::span<const MeshPair> meshes, const TrainingSetOptions& options) {
  if (options.quota < 1) throw Error("quota must be >= 1");
  if (options.mu_g_list.empty()) throw Error("mu_g list is empty");
  options.voxel.validate();

  struct Candidate {
    int mesh;
    int face;
  };
  std::array<std::vector<Candidate>, kNumCategories> pools;
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const TriangleMesh& mesh = *meshes[m].noisy;
    if (!mesh.same_topology(*meshes[m].truth) &&
        mesh.num_faces() != meshes[m].truth->num_faces()) {
      throw Error("mesh " + std::to_string(m) + " and its ground truth differ in faces");
    }
    std::vector<int> cat(mesh.num_faces(), -1);
#pragma omp parallel for schedule(dynamic, 64)
    for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
      if (!mesh.is_degenerate(f)) cat[f] = static_cast<int>(categorize_face(mesh, f));
    }
    for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
      if (cat[f] >= 0) pools[cat[f]].push_back({static_cast<int>(m), f});
    }
  }

  TrainingSet set;
  Rng rng(options.seed);
  std::vector<Candidate> chosen;
  for (int c = 0; c < kNumCategories; ++c) {
    const std::size_t supply = pools[c].size();
    const std::size_t take = std::min<std::size_t>(options.quota, supply);
    set.supply[c] = supply;
    set.taken[c] = take;
    const char* name = to_string(static_cast<FaceCategory>(c));
    if (supply == 0) {
      set.warnings.push_back(std::string("category ") + name + " is empty");
    } else if (take < static_cast<std::size_t>(options.quota)) {
      set.warnings.push_back(std::string("category ") + name + " short: " + std::to_string(supply) +
                             " of " + std::to_string(options.quota) + " faces available");
    }
    for (std::size_t i : rng.sample_without_replacement(supply, take)) chosen.push_back(pools[c][i]);
  }

  set.tuples.resize(chosen.size());
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      if (chosen[i].mesh == static_cast<int>(m)) slots.push_back(i);
    }
    if (slots.empty()) continue;
    const TriangleMesh& mesh = *meshes[m].noisy;
    const FaceVoxelizer voxelizer(mesh, options.voxel);
    const TargetGenerator targets(mesh, meshes[m].truth->normals(), options.target_params);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t k = 0; k < slots.size(); ++k) {
      TrainingTuple& t = set.tuples[slots[k]];
      const int f = chosen[slots[k]].face;
      t.grid = voxelizer.voxelize(f);
      t.targets = targets.targets(f, options.mu_g_list);
      for (Vec3& n : t.targets) n = t.grid.rotation * n;
      t.mesh_id = static_cast<int>(m);
      t.face_id = f;
      t.stage = options.stage;
    }
    if (targets.warnings() > 0) {
      set.warnings.push_back("mesh " + std::to_string(m) + ": " + std::to_string(targets.warnings()) +
                             " targets fell back to the face normal");
    }
  }
  return set;
}

// ---------------------------------------------------------------------------

bool WeightSet::has(int cnn) const {
  if (shared) return !cnns.empty() && cnns[0].has_value();
  return cnn >= 1 && cnn <= static_cast<int>(cnns.size()) && cnns[cnn - 1].has_value();
}

const nn::NetworkWeights& WeightSet::get(int cnn) const {
  if (!has(cnn)) throw Error("missing weights for CNN " + std::to_string(cnn));
  return shared ? *cnns[0] : *cnns[cnn - 1];
}

void WeightSet::set(int cnn, nn::NetworkWeights w) {
  if (cnn < 1) throw Error("CNN indices start at 1");
  const std::size_t slot = shared ? 0 : static_cast<std::size_t>(cnn - 1);
  if (cnns.size() <= slot) cnns.resize(slot + 1);
  cnns[slot] = std::move(w);
}

void WeightSet::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  if (shared) {
    nn::save_weights(get(1), dir / "shared.nnwt");
    return;
  }
  for (std::size_t i = 0; i < cnns.size(); ++i) {
    if (cnns[i]) nn::save_weights(*cnns[i], dir / ("cnn_" + std::to_string(i + 1) + ".nnwt"));
  }
}

WeightSet WeightSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("weights directory '" + dir.string() + "' not found");
  WeightSet set;
  if (std::filesystem::exists(dir / "shared.nnwt")) {
    set.shared = true;
    set.set(1, nn::load_weights(dir / "shared.nnwt"));
    return set;
  }
  bool any = false;
  for (int i = 1; i <= 6; ++i) {
    const auto path = dir / ("cnn_" + std::to_string(i) + ".nnwt");
    if (std::filesystem::exists(path)) {
      set.set(i, nn::load_weights(path));
      any = true;
    }
  }
  if (!any) throw Error("no weights files in '" + dir.string() + "'");
  return set;
}

LearnedFilterResult learned_filter_normals(const TriangleMesh& mesh, nn::Network<float>& net,
                                           const VoxelParams& voxel, int head, int batch) {
  if (head < 0 || head >= net.spec().heads) throw Error("head index out of range");
  batch = std::max(batch, 1);
  std::vector<int> faces;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (!mesh.is_degenerate(f)) faces.push_back(f);
  }
  LearnedFilterResult result;
  result.normals.assign(mesh.num_faces(), Vec3::Zero());
  if (faces.empty()) return result;

  const FaceVoxelizer voxelizer(mesh, voxel);
  const int side = voxel.side();
  std::vector<Mat3> rotations;
  for (std::size_t start = 0; start < faces.size(); start += batch) {
    const int n = static_cast<int>(std::min<std::size_t>(batch, faces.size() - start));
    Tensor<float> input({n, 3, side, side, side});
    rotations.assign(n, Mat3::Identity());
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
      const VolumetricGrid grid = voxelizer.voxelize(faces[start + i]);
      grid_to_tensor(grid, input.sample(i));
      rotations[i] = grid.rotation;
    }
    const Tensor<float> out = net.forward(input, nn::Mode::kInference);
    for (int i = 0; i < n; ++i) {
      const float* row = out.sample(i) + 3 * head;
      const Vec3 local(row[0], row[1], row[2]);
      const int f = faces[start + i];
      const double len = local.norm();
      if (!(len > 0.0) || !std::isfinite(len)) {
        result.normals[f] = mesh.normal(f);
        ++result.warnings;
        continue;
      }
      result.normals[f] = rotations[i].transpose() * (local / len);
    }
  }
  return result;
}

LearnedResult denoise_learned(const TriangleMesh& mesh, const WeightSet& weights,
                              const nn::NetworkSpec& spec, const LearnedParams& params,
                              const TriangleMesh* truth, const gnf::IterationObserver& observer) {
  if (params.nf < 0) throw Error("N_f must be >= 0");
  if (params.nv < 0) throw Error("N_v must be >= 0");
  params.voxel.validate();
  const std::vector<double>& list = spec.mu_g_list.empty() ? nn::default_mu_g_list() : spec.mu_g_list;
  const int head = head_index(list, params.mu_g);
  if (truth && !mesh.same_topology(*truth) && mesh.num_faces() != truth->num_faces()) {
    throw Error("truth mesh does not match the input faces");
  }

  const StagePlan plan = StagePlan::make(params.nf);
  std::map<int, nn::Network<float>> nets;
  for (int cnn : plan.cnn_for_iteration) {
    if (nets.count(cnn)) continue;
    nn::Network<float> net(spec);
    net.import_weights(weights.get(cnn));
    nets.emplace(cnn, std::move(net));
  }

  LearnedResult result{mesh, {}, 0};
  for (int it = 1; it <= params.nf; ++it) {
    nn::Network<float>& net = nets.at(plan.cnn_for_iteration[it - 1]);
    const LearnedFilterResult filtered =
        learned_filter_normals(result.mesh, net, params.voxel, head, params.batch);
    result.warnings += filtered.warnings;
    result.mesh = gnf::update_vertices(result.mesh, filtered.normals, params.nv);
    if (truth) {
      gnf::IterationStats s;
      s.iteration = it;
      s.e_a = mean_angular_error(result.mesh, *truth);
      s.e_v = vertex_l2_error(result.mesh, *truth);
      result.trace.push_back(s);
      if (observer) observer(s);
    }
  }
  return result;
}

std::vector<TriangleMesh> advance_training_meshes(std::span<const TriangleMesh> meshes,
                                                  const nn::NetworkWeights& cnn_prev,
                                                  const nn::NetworkSpec& spec,
                                                  const VoxelParams& voxel) {
  StagePlan plan;
  const std::vector<double>& list = spec.mu_g_list.empty() ? nn::default_mu_g_list() : spec.mu_g_list;
  const int head = head_index(list, plan.mu_g);
  nn::Network<float> net(spec);
  net.import_weights(cnn_prev);
  std::vector<TriangleMesh> out;
  out.reserve(meshes.size());
  for (const TriangleMesh& m : meshes) {
    const LearnedFilterResult filtered = learned_filter_normals(m, net, voxel, head);
    out.push_back(gnf::update_vertices(m, filtered.normals, plan.nv));
  }
  return out;
}

WeightSet train_iterative(std::span<const TriangleMesh> noisy, std::span<const TriangleMesh> truth,
                          const IterativeTrainingOptions& options) {
  if (noisy.size() != truth.size() || noisy.empty()) {
    throw Error("training corpus needs matching noisy and ground-truth meshes");
  }
  if (options.stages < 1 || options.stages > 6) throw Error("stage count must be in [1, 6]");
  auto log = [&](const std::string& s) {
    if (options.log) options.log(s);
  };

  WeightSet set;
  set.shared = options.shared;
  std::vector<TriangleMesh> current(noisy.begin(), noisy.end());
  std::optional<nn::Network<float>> shared_net;
  std::optional<nn::AdamOptimizer<float>> shared_opt;

  for (int stage = 1; stage <= options.stages; ++stage) {
    if (stage > 1) {
      current = advance_training_meshes(current, set.get(stage - 1), options.spec, options.data.voxel);
      double e_a = 0.0;
      for (std::size_t m = 0; m < current.size(); ++m) e_a += mean_angular_error(current[m], truth[m]);
      log("stage " + std::to_string(stage) + ": corpus E_a " + std::to_string(e_a / current.size()));
    }
    std::vector<MeshPair> pairs;
    for (std::size_t m = 0; m < current.size(); ++m) pairs.push_back({&current[m], &truth[m]});
    TrainingSetOptions data = options.data;
    data.stage = stage;
    data.seed = options.seed + 1000003ull * stage;
    data.mu_g_list = options.spec.mu_g_list.empty() ? nn::default_mu_g_list() : options.spec.mu_g_list;
    const TrainingSet ts = build_training_set(pairs, data);
    for (const std::string& w : ts.warnings) log("stage " + std::to_string(stage) + ": " + w);
    log("stage " + std::to_string(stage) + ": " + std::to_string(ts.tuples.size()) + " tuples");

    nn::TrainOptions train = options.train;
    train.seed = options.seed + 7919ull * stage;
    const MemoryTupleSource source(ts.tuples);
    if (options.shared) {
      if (!shared_net) {
        shared_net.emplace(options.spec);
        shared_net->initialize(options.seed);
        shared_opt.emplace();
      }
      const nn::TrainReport r = nn::train_network(*shared_net, *shared_opt, source, train);
      log("stage " + std::to_string(stage) + ": " + std::to_string(r.steps) + " steps, loss " +
          std::to_string(r.last_loss));
      set.set(stage, shared_net->export_weights());
    } else {
      nn::Network<float> net(options.spec);
      net.initialize(options.seed + stage);
      nn::AdamOptimizer<float> opt;
      const nn::TrainReport r = nn::train_network(net, opt, source, train);
      log("stage " + std::to_string(stage) + ": " + std::to_string(r.steps) + " steps, loss " +
          std::to_string(r.last_loss));
      set.set(stage, net.export_weights());
    }
  }
  return set;
}

}  // namespace voxnorm::pipeline
