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
#include <filesystem>
#include <string>
#include <vector>

#include "voxnorm/network.hpp"

namespace voxnorm {

/// Run settings shared by the CLI subcommands.
struct PipelineConfig {
  int nf = 10;
  int nv = 20;
  double mu_g = 0.4;
  int ts = 20;
  double alpha_c = 8.0;
  int n_heads = 6;
  std::vector<double> mu_g_list = nn::default_mu_g_list();
  std::uint64_t seed = 1;

  void validate() const;
};

/// Keys: nf, nv, mu_g, ts, alpha_c, n_heads, mu_g_list, seed. Missing keys
/// keep their defaults; unknown keys are an error.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

/// Per-model (N_f, N_v, mu_g) setting.
struct ModelSetting {
  std::string name;
  int nf = 0;
  int nv = 0;
  double mu_g = 0.0;

  bool operator==(const ModelSetting&) const = default;
};

/// {"models": [{"name": ..., "nf": ..., "nv": ..., "mu_g": ...}, ...]}
std::vector<ModelSetting> parse_model_table(const std::string& json_text);
std::vector<ModelSetting> load_model_table(const std::filesystem::path& path);
std::string model_table_to_json(const std::vector<ModelSetting>& models);
const ModelSetting& find_model(const std::vector<ModelSetting>& models, const std::string& name);

}  // namespace voxnorm
