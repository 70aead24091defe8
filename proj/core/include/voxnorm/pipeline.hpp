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

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "voxnorm/gnf.hpp"
#include "voxnorm/network.hpp"
#include "voxnorm/training.hpp"
#include "voxnorm/voxelizer.hpp"

namespace voxnorm::pipeline {

// ---------------------------------------------------------------------------
// Face categories

enum class FaceCategory { kV1 = 0, kV2 = 1, kV3 = 2, kV4 = 3 };
inline constexpr int kNumCategories = 4;

const char* to_string(FaceCategory c);

/// Largest angle (degrees) between the normals of any two non-degenerate
/// faces in the 2-ring patch of f.
double max_patch_angle(const TriangleMesh& mesh, int f, int ring = 2);

/// v1: a > 80; v2: 50 < a <= 80; v3: 20 < a <= 50; v4: a <= 20.
FaceCategory category_from_angle(double a_p);
FaceCategory categorize_face(const TriangleMesh& mesh, int f);

// ---------------------------------------------------------------------------
// Stage plan

/// CNN index (1..6) used at a 1-based iteration: 1, 2, 3, then 4 for
/// iterations 4-5, 5 for 6-10 and 6 from 11 on.
int select_cnn(int iteration, int nf);

struct StagePlan {
  int nf = 0;
  std::vector<int> cnn_for_iteration;  // entry i is the CNN of iteration i + 1
  double mu_g = 0.4;                   // filtering that produces the next stage's meshes
  int nv = 20;

  static StagePlan make(int nf);
  /// Highest CNN index the plan needs.
  int cnn_count() const;
};

/// Position of mu_g in the list; values not in the list are an error.
int head_index(std::span<const double> mu_g_list, double mu_g);

// ---------------------------------------------------------------------------
// Targets and training sets

/// Guided filtering of one face with ground-truth normals as guidance, once
/// per mu_g. Neighborhoods and mu_d are prepared once per mesh.
class TargetGenerator {
 public:
  TargetGenerator(const TriangleMesh& mesh, const NormalField& truth_normals,
                  gnf::GnfParams params = {});

  /// World-frame unit targets for face f. A vanishing weighted sum falls
  /// back to the face's current normal and counts a warning.
  std::vector<Vec3> targets(int f, std::span<const double> mu_g_list) const;
  int warnings() const { return warnings_; }

 private:
  const TriangleMesh& mesh_;
  const NormalField& truth_;
  gnf::GnfParams params_;
  double mu_d_ = 0.0;
  std::vector<std::vector<int>> neighborhoods_;
  mutable int warnings_ = 0;
};

std::vector<Vec3> make_targets(const TriangleMesh& mesh, const NormalField& truth_normals, int f,
                               std::span<const double> mu_g_list, const gnf::GnfParams& params = {});

struct MeshPair {
  const TriangleMesh* noisy = nullptr;
  const TriangleMesh* truth = nullptr;
};

struct TrainingSetOptions {
  int quota = 45000;  // faces per category
  std::uint64_t seed = 1;
  int stage = 1;
  VoxelParams voxel;
  std::vector<double> mu_g_list = nn::default_mu_g_list();
  gnf::GnfParams target_params;
};

struct TrainingSet {
  std::vector<TrainingTuple> tuples;
  std::array<std::size_t, kNumCategories> supply{};
  std::array<std::size_t, kNumCategories> taken{};
  std::vector<std::string> warnings;
};

/// Balanced sample of faces across categories (uniform without replacement,
/// per category, seeded). Tuples are ordered by category, then draw order.
/// Targets are stored in the face's normalized frame.
TrainingSet build_training_set(std::span<const MeshPair> meshes, const TrainingSetOptions& options);

// ---------------------------------------------------------------------------
// Learned filtering

/// One set of weights per CNN index, or a single network shared by every
/// index.
struct WeightSet {
  std::vector<std::optional<nn::NetworkWeights>> cnns = std::vector<std::optional<nn::NetworkWeights>>(6);
  bool shared = false;

  bool has(int cnn) const;
  const nn::NetworkWeights& get(int cnn) const;
  void set(int cnn, nn::NetworkWeights w);

  /// cnn_<k>.nnwt per present index, or shared.nnwt.
  void save(const std::filesystem::path& dir) const;
  static WeightSet load(const std::filesystem::path& dir);
};

struct LearnedFilterResult {
  NormalField normals;  // world frame, unit; zero for degenerate faces
  int warnings = 0;
};

/// Voxelize every face, run the network in inference mode, take `head`,
/// normalize and rotate back to world space.
LearnedFilterResult learned_filter_normals(const TriangleMesh& mesh, nn::Network<float>& net,
                                           const VoxelParams& voxel, int head, int batch = 32);

struct LearnedParams {
  int nf = 10;
  int nv = 20;
  double mu_g = 0.4;
  VoxelParams voxel;
  int batch = 32;
};

struct LearnedResult {
  TriangleMesh mesh;
  std::vector<gnf::IterationStats> trace;
  int warnings = 0;
};

LearnedResult denoise_learned(const TriangleMesh& mesh, const WeightSet& weights,
                              const nn::NetworkSpec& spec, const LearnedParams& params,
                              const TriangleMesh* truth = nullptr,
                              const gnf::IterationObserver& observer = {});

/// One learned filtering pass (head for mu_g = 0.4, N_v = 20) per mesh.
std::vector<TriangleMesh> advance_training_meshes(std::span<const TriangleMesh> meshes,
                                                  const nn::NetworkWeights& cnn_prev,
                                                  const nn::NetworkSpec& spec,
                                                  const VoxelParams& voxel);

// ---------------------------------------------------------------------------
// Iterative training

struct IterativeTrainingOptions {
  int stages = 6;  // CNN_1 .. CNN_stages
  bool shared = false;
  std::uint64_t seed = 1;
  nn::NetworkSpec spec = nn::build_normalnet_spec(6);
  TrainingSetOptions data;
  nn::TrainOptions train;
  std::function<void(const std::string&)> log;
};

/// Alternates data generation and training: stage 1 uses the noisy meshes
/// as they are, stage i > 1 the meshes filtered once by CNN_{i-1}.
WeightSet train_iterative(std::span<const TriangleMesh> noisy, std::span<const TriangleMesh> truth,
                          const IterativeTrainingOptions& options);

}  // namespace voxnorm::pipeline
