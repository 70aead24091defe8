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

#include <filesystem>
#include <iosfwd>

#include "voxnorm/network.hpp"

namespace voxnorm::nn {

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

/// Blob name carrying the optimizer step counter (one f32; exact below 2^24).
inline constexpr const char* kStepBlobName = "optimizer.step";

/// "NNWT", u32 version, u32 blob count, then per blob: u32 name length, name
/// bytes, u32 rank, rank x u32 dims, f32 data; all little-endian.
void write_weights(std::ostream& out, const NetworkWeights& weights);
NetworkWeights read_weights(std::istream& in);

void save_weights(const NetworkWeights& weights, const std::filesystem::path& path);
NetworkWeights load_weights(const std::filesystem::path& path);

}  // namespace voxnorm::nn
