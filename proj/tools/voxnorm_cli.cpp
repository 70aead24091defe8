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


// voxnorm: batch command line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "voxnorm/config.hpp"
#include "voxnorm/gnf.hpp"
#include "voxnorm/grid_io.hpp"
#include "voxnorm/mesh_io.hpp"
#include "voxnorm/metrics.hpp"
#include "voxnorm/noise.hpp"
#include "voxnorm/pipeline.hpp"
#include "voxnorm/training_data.hpp"
#include "voxnorm/weights_io.hpp"

namespace fs = std::filesystem;
using namespace voxnorm;

namespace {

// Config file values, overridden by any flag given on the command line.
struct ConfigFlags {
  std::string path;
  PipelineConfig values;
  CLI::Option* nf = nullptr;
  CLI::Option* nv = nullptr;
  CLI::Option* mu_g = nullptr;
  CLI::Option* ts = nullptr;
  CLI::Option* alpha_c = nullptr;
  CLI::Option* seed = nullptr;
  std::string cube_basis = "edge";

  void add_to(CLI::App* app, bool filtering, bool voxel, bool seeded) {
    app->add_option("--config", path, "JSON config file")->check(CLI::ExistingFile);
    if (filtering) {
      nf = app->add_option("--nf", values.nf, "filtering iterations N_f");
      nv = app->add_option("--nv", values.nv, "vertex updates per iteration N_v");
      mu_g = app->add_option("--mu-g", values.mu_g, "range kernel width mu_g");
    }
    if (voxel) {
      ts = app->add_option("--ts", values.ts, "grid half extent T_s");
      alpha_c = app->add_option("--alpha-c", values.alpha_c, "cube size divisor alpha_c");
      app->add_option("--cube-basis", cube_basis, "cube size basis: edge | centroid")
          ->check(CLI::IsMember({"edge", "centroid"}));
    }
    if (seeded) seed = app->add_option("--seed", values.seed, "random seed");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = path.empty() ? PipelineConfig{} : load_config(path);
    auto take = [](CLI::Option* opt, auto& dst, const auto& src) {
      if (opt && opt->count() > 0) dst = src;
    };
    take(nf, c.nf, values.nf);
    take(nv, c.nv, values.nv);
    take(mu_g, c.mu_g, values.mu_g);
    take(ts, c.ts, values.ts);
    take(alpha_c, c.alpha_c, values.alpha_c);
    take(seed, c.seed, values.seed);
    c.validate();
    return c;
  }

  VoxelParams voxel(const PipelineConfig& c) const {
    VoxelParams v;
    v.half_extent = c.ts;
    v.alpha_c = c.alpha_c;
    v.cube_basis = cube_basis == "edge" ? CubeBasis::kEdgeLength : CubeBasis::kCentroidDistance;
    return v;
  }
};

nn::NetworkSpec spec_for(const PipelineConfig& c) { return nn::build_normalnet_spec(c.mu_g_list); }

void print_stats(const gnf::IterationStats& s) {
  std::printf("iteration %d: E_a=%.6f E_v=%.9g\n", s.iteration, s.e_a, s.e_v);
}

pipeline::WeightSet load_weight_set(const fs::path& p) {
  if (fs::is_directory(p)) return pipeline::WeightSet::load(p);
  pipeline::WeightSet set;
  set.shared = true;
  set.set(1, nn::load_weights(p));
  return set;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxnorm: mesh denoising by guided normal filtering and learned filtering"};
  app.require_subcommand(1);

  // add-noise
  auto* noise_cmd = app.add_subcommand("add-noise", "add synthetic noise to a mesh");
  std::string noise_in, noise_out, noise_kind = "gaussian", noise_dir = "normal";
  NoiseSpec noise;
  noise_cmd->add_option("--in", noise_in)->required()->check(CLI::ExistingFile);
  noise_cmd->add_option("--out", noise_out)->required();
  noise_cmd->add_option("--level", noise.level, "std dev as a multiple of mean edge length")->required();
  noise_cmd->add_option("--kind", noise_kind)->check(CLI::IsMember({"gaussian", "impulsive"}));
  noise_cmd->add_option("--fraction", noise.impulse_fraction, "impulsive: fraction of vertices");
  noise_cmd->add_option("--direction", noise_dir)->check(CLI::IsMember({"normal", "random"}));
  noise_cmd->add_option("--seed", noise.seed);

  // denoise-gnf
  auto* gnf_cmd = app.add_subcommand("denoise-gnf", "guided normal filtering");
  std::string gnf_in, gnf_out, gnf_truth;
  ConfigFlags gnf_cfg;
  gnf_cmd->add_option("--in", gnf_in)->required()->check(CLI::ExistingFile);
  gnf_cmd->add_option("--out", gnf_out)->required();
  gnf_cmd->add_option("--truth", gnf_truth)->check(CLI::ExistingFile);
  gnf_cfg.add_to(gnf_cmd, true, false, false);

  // denoise-net
  auto* net_cmd = app.add_subcommand("denoise-net", "learned normal filtering");
  std::string net_in, net_out, net_truth, net_weights, net_model, net_table;
  int net_batch = 32;
  ConfigFlags net_cfg;
  net_cmd->add_option("--in", net_in)->required()->check(CLI::ExistingFile);
  net_cmd->add_option("--out", net_out)->required();
  net_cmd->add_option("--weights", net_weights, "weights directory (cnn_<k>.nnwt) or one .nnwt file")
      ->required()
      ->check(CLI::ExistingPath);
  net_cmd->add_option("--truth", net_truth)->check(CLI::ExistingFile);
  net_cmd->add_option("--model", net_model, "take N_f, N_v, mu_g from the model table");
  net_cmd->add_option("--models", net_table, "model table JSON")->check(CLI::ExistingFile);
  net_cmd->add_option("--batch", net_batch, "faces per forward pass");
  net_cfg.add_to(net_cmd, true, true, false);

  // voxelize
  auto* vox_cmd = app.add_subcommand("voxelize", "write the normal grid of one face");
  std::string vox_in, vox_out;
  int vox_face = 0;
  ConfigFlags vox_cfg;
  vox_cmd->add_option("--in", vox_in)->required()->check(CLI::ExistingFile);
  vox_cmd->add_option("--face", vox_face)->required();
  vox_cmd->add_option("--out", vox_out)->required();
  vox_cfg.add_to(vox_cmd, false, true, false);

  // gen-data
  auto* gen_cmd = app.add_subcommand("gen-data", "build a training set directory");
  std::vector<std::string> gen_noisy, gen_truth;
  std::string gen_out, gen_weights;
  int gen_quota = 45000, gen_stage = 1;
  ConfigFlags gen_cfg;
  gen_cmd->add_option("--noisy", gen_noisy, "noisy meshes")->required()->delimiter(',');
  gen_cmd->add_option("--truth", gen_truth, "ground-truth meshes, same order")->required()->delimiter(',');
  gen_cmd->add_option("--out", gen_out)->required();
  gen_cmd->add_option("--quota", gen_quota, "faces per category");
  gen_cmd->add_option("--stage", gen_stage, "training stage i (i > 1 needs --weights)");
  gen_cmd->add_option("--weights", gen_weights, "weights of CNN_1..CNN_{i-1}");
  gen_cfg.add_to(gen_cmd, false, true, true);

  // train
  auto* train_cmd = app.add_subcommand("train", "train one network on a training set directory");
  std::string train_data, train_out, train_init;
  nn::TrainOptions train_opts;
  ConfigFlags train_cfg;
  train_cmd->add_option("--data", train_data)->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train_out)->required();
  train_cmd->add_option("--epochs", train_opts.epochs);
  train_cmd->add_option("--batch", train_opts.batch);
  train_cmd->add_option("--max-steps", train_opts.max_steps, "stop after this many steps (0: off)");
  train_cmd->add_option("--init", train_init, "continue from these weights")->check(CLI::ExistingFile);
  train_cfg.add_to(train_cmd, false, false, true);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "E_a and E_v of a denoised mesh");
  std::string eval_in, eval_truth, eval_json;
  eval_cmd->add_option("--in", eval_in, "denoised mesh")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", eval_truth)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--json", eval_json, "write a JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*noise_cmd) {
      noise.kind = noise_kind == "gaussian" ? NoiseKind::kGaussian : NoiseKind::kImpulsive;
      noise.direction = noise_dir == "normal" ? NoiseDirection::kVertexNormal : NoiseDirection::kRandom;
      save_mesh(add_noise(load_mesh(noise_in), noise), noise_out);
    } else if (*gnf_cmd) {
      const PipelineConfig c = gnf_cfg.resolve();
      gnf::GnfParams p;
      p.mu_g = c.mu_g;
      p.nf = c.nf;
      p.nv = c.nv;
      const TriangleMesh mesh = load_mesh(gnf_in);
      std::optional<TriangleMesh> truth;
      if (!gnf_truth.empty()) truth = load_mesh(gnf_truth);
      const gnf::DenoiseResult r = gnf::gnf_denoise(mesh, p, truth ? &*truth : nullptr, print_stats);
      if (r.warnings) std::fprintf(stderr, "warnings: %d\n", r.warnings);
      save_mesh(r.mesh, gnf_out);
    } else if (*net_cmd) {
      PipelineConfig c = net_cfg.resolve();
      if (!net_model.empty()) {
        if (net_table.empty()) throw Error("--model needs --models");
        const ModelSetting& m = find_model(load_model_table(net_table), net_model);
        c.nf = m.nf;
        c.nv = m.nv;
        c.mu_g = m.mu_g;
      }
      pipeline::LearnedParams p;
      p.nf = c.nf;
      p.nv = c.nv;
      p.mu_g = c.mu_g;
      p.voxel = net_cfg.voxel(c);
      p.batch = net_batch;
      const TriangleMesh mesh = load_mesh(net_in);
      std::optional<TriangleMesh> truth;
      if (!net_truth.empty()) truth = load_mesh(net_truth);
      const pipeline::LearnedResult r = pipeline::denoise_learned(
          mesh, load_weight_set(net_weights), spec_for(c), p, truth ? &*truth : nullptr, print_stats);
      if (r.warnings) std::fprintf(stderr, "warnings: %d\n", r.warnings);
      save_mesh(r.mesh, net_out);
    } else if (*vox_cmd) {
      const PipelineConfig c = vox_cfg.resolve();
      const VolumetricGrid g = voxelize_face(load_mesh(vox_in), vox_face, vox_cfg.voxel(c));
      save_grid(g, vox_out);
      std::printf("side=%d L_c=%.9g occupancy=%d\n", g.side(), g.cube_size, g.occupancy);
    } else if (*gen_cmd) {
      const PipelineConfig c = gen_cfg.resolve();
      if (gen_noisy.size() != gen_truth.size()) throw Error("--noisy and --truth differ in length");
      std::vector<TriangleMesh> noisy, truth;
      for (const std::string& p : gen_noisy) noisy.push_back(load_mesh(p));
      for (const std::string& p : gen_truth) truth.push_back(load_mesh(p));
      const VoxelParams voxel = gen_cfg.voxel(c);
      const nn::NetworkSpec spec = spec_for(c);
      if (gen_stage > 1) {
        if (gen_weights.empty()) throw Error("--stage > 1 needs --weights");
        const pipeline::WeightSet set = load_weight_set(gen_weights);
        for (int i = 1; i < gen_stage; ++i) {
          noisy = pipeline::advance_training_meshes(noisy, set.get(i), spec, voxel);
        }
      }
      std::vector<pipeline::MeshPair> pairs;
      for (std::size_t i = 0; i < noisy.size(); ++i) pairs.push_back({&noisy[i], &truth[i]});
      pipeline::TrainingSetOptions o;
      o.quota = gen_quota;
      o.seed = c.seed;
      o.stage = gen_stage;
      o.voxel = voxel;
      o.mu_g_list = c.mu_g_list;
      const pipeline::TrainingSet set = pipeline::build_training_set(pairs, o);
      for (const std::string& w : set.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      nlohmann::json meta = {{"stage", gen_stage},
                             {"seed", c.seed},
                             {"quota", gen_quota},
                             {"alpha_c", c.alpha_c},
                             {"mu_g_list", c.mu_g_list},
                             {"noisy", gen_noisy},
                             {"truth", gen_truth}};
      write_training_data(gen_out, set.tuples, meta.dump());
      std::printf("tuples=%zu v1=%zu v2=%zu v3=%zu v4=%zu\n", set.tuples.size(), set.taken[0],
                  set.taken[1], set.taken[2], set.taken[3]);
    } else if (*train_cmd) {
      const PipelineConfig c = train_cfg.resolve();
      const DiskTupleSource data(train_data);
      std::vector<double> list = c.mu_g_list;
      if (static_cast<int>(list.size()) != data.heads()) {
        throw Error("training data has " + std::to_string(data.heads()) + " heads, config lists " +
                    std::to_string(list.size()));
      }
      nn::Network<float> net(nn::build_normalnet_spec(list));
      net.initialize(c.seed);
      if (!train_init.empty()) net.import_weights(nn::load_weights(train_init));
      nn::AdamOptimizer<float> opt;
      train_opts.seed = c.seed;
      train_opts.progress = [](const nn::TrainProgress& p) {
        if (p.step % 50 == 0) std::printf("step %llu epoch %d loss %.6g lr %.4g\n",
                                          static_cast<unsigned long long>(p.step), p.epoch, p.loss, p.lr);
      };
      const nn::TrainReport r = nn::train_network(net, opt, data, train_opts);
      nn::save_weights(net.export_weights(), train_out);
      std::printf("steps=%llu epochs=%d loss=%.6g\n", static_cast<unsigned long long>(r.steps), r.epochs,
                  r.last_loss);
    } else if (*eval_cmd) {
      const MetricReport r = evaluate(load_mesh(eval_in), load_mesh(eval_truth));
      std::printf("E_a=%.6f E_v=%.9g\n", r.e_a, r.e_v);
      if (!eval_json.empty()) {
        std::ofstream out(eval_json);
        if (!out) throw Error("cannot write '" + eval_json + "'");
        out << r.to_json() << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
