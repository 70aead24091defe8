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


#include "voxnorm/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace voxnorm {
namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (nf < 0) throw Error("nf must be >= 0");
  if (nv < 0) throw Error("nv must be >= 0");
  if (ts < 1) throw Error("ts must be >= 1");
  if (!(alpha_c > 0.0)) throw Error("alpha_c must be > 0");
  if (n_heads < 1) throw Error("n_heads must be >= 1");
  if (static_cast<int>(mu_g_list.size()) != n_heads) throw Error("mu_g_list must have n_heads entries");
  for (double m : mu_g_list) {
    if (!(m > 0.0)) throw Error("mu_g_list entries must be > 0");
  }
  if (!(mu_g > 0.0)) throw Error("mu_g must be > 0");
}

PipelineConfig parse_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  if (!j.is_object()) throw Error("config must be a JSON object");
  PipelineConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "nf") c.nf = value.get<int>();
      else if (key == "nv") c.nv = value.get<int>();
      else if (key == "mu_g") c.mu_g = value.get<double>();
      else if (key == "ts") c.ts = value.get<int>();
      else if (key == "alpha_c") c.alpha_c = value.get<double>();
      else if (key == "n_heads") c.n_heads = value.get<int>();
      else if (key == "mu_g_list") c.mu_g_list = value.get<std::vector<double>>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw Error("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

std::string config_to_json(const PipelineConfig& c) {
  const json j = {{"nf", c.nf},           {"nv", c.nv},           {"mu_g", c.mu_g},
                  {"ts", c.ts},           {"alpha_c", c.alpha_c}, {"n_heads", c.n_heads},
                  {"mu_g_list", c.mu_g_list}, {"seed", c.seed}};
  return j.dump(2);
}

std::vector<ModelSetting> parse_model_table(const std::string& json_text) {
  const json j = parse_json(json_text);
  std::vector<ModelSetting> out;
  try {
    for (const json& m : j.at("models")) {
      ModelSetting s;
      s.name = m.at("name").get<std::string>();
      s.nf = m.at("nf").get<int>();
      s.nv = m.at("nv").get<int>();
      s.mu_g = m.at("mu_g").get<double>();
      if (s.nf < 0 || s.nv < 0 || !(s.mu_g > 0.0)) throw Error("model " + s.name + ": invalid setting");
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("model table: ") + e.what());
  }
  return out;
}

std::vector<ModelSetting> load_model_table(const std::filesystem::path& path) {
  return parse_model_table(read_text(path));
}

std::string model_table_to_json(const std::vector<ModelSetting>& models) {
  json arr = json::array();
  for (const ModelSetting& m : models) {
    arr.push_back({{"name", m.name}, {"nf", m.nf}, {"nv", m.nv}, {"mu_g", m.mu_g}});
  }
  return json{{"models", arr}}.dump(2);
}

const ModelSetting& find_model(const std::vector<ModelSetting>& models, const std::string& name) {
  for (const ModelSetting& m : models) {
    if (m.name == name) return m;
  }
  throw Error("no model named '" + name + "'");
}

}  // namespace voxnorm
