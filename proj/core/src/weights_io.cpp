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


#include "voxnorm/weights_io.hpp"

#include <fstream>

#include "binary_io.hpp"

namespace voxnorm::nn {
namespace {

constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;
constexpr std::uint64_t kMaxExactStep = std::uint64_t{1} << 24;

void write_blob(std::ostream& out, const std::string& name, std::span<const std::uint32_t> dims,
                std::span<const float> data) {
  binary::write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  binary::write_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (std::uint32_t d : dims) binary::write_u32(out, d);
  binary::write_f32s(out, data);
}

}  // namespace

void write_weights(std::ostream& out, const NetworkWeights& weights) {
  if (weights.step >= kMaxExactStep) throw Error("step counter too large to store exactly");
  for (const WeightBlob& b : weights.blobs) {
    std::uint64_t n = 1;
    for (std::uint32_t d : b.dims) n *= d;
    if (n != b.data.size()) throw Error("blob " + b.name + " size does not match its shape");
    if (b.name == kStepBlobName) throw Error("reserved blob name " + b.name);
  }
  binary::write_magic(out, "NNWT");
  binary::write_u32(out, kWeightsFormatVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(weights.blobs.size() + 1));
  for (const WeightBlob& b : weights.blobs) write_blob(out, b.name, b.dims, b.data);
  const std::uint32_t one = 1;
  const float step = static_cast<float>(weights.step);
  write_blob(out, kStepBlobName, {&one, 1}, {&step, 1});
}

NetworkWeights read_weights(std::istream& in) {
  binary::Reader reader(in, "unexpected end of weights blob");
  if (reader.bytes(4) != "NNWT") throw Error("bad weights magic (expected NNWT)");
  const std::uint32_t version = reader.u32();
  if (version != kWeightsFormatVersion) {
    throw Error("unsupported weights version " + std::to_string(version));
  }
  const std::uint32_t count = reader.u32();
  NetworkWeights w;
  bool have_step = false;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = reader.u32();
    if (name_len == 0 || name_len > kMaxNameLength) throw Error("bad blob name length");
    WeightBlob b;
    b.name = reader.bytes(name_len);
    const std::uint32_t rank = reader.u32();
    if (rank > kMaxRank) throw Error("blob " + b.name + " has implausible rank");
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      b.dims.push_back(reader.u32());
      n *= b.dims.back();
      if (n > kMaxElements) throw Error("blob " + b.name + " is implausibly large");
    }
    b.data.resize(n);
    reader.f32s(b.data);
    if (b.name == kStepBlobName) {
      if (n != 1 || !(b.data[0] >= 0.0f)) throw Error("malformed step counter blob");
      w.step = static_cast<std::uint64_t>(b.data[0]);
      have_step = true;
    } else {
      w.blobs.push_back(std::move(b));
    }
  }
  if (!have_step) throw Error("weights file has no step counter");
  if (!reader.at_end()) throw Error("trailing bytes after weights blobs");
  return w;
}

void save_weights(const NetworkWeights& weights, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write weights file '" + path.string() + "'");
  write_weights(out, weights);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open weights file '" + path.string() + "'");
  return read_weights(in);
}

}  // namespace voxnorm::nn
