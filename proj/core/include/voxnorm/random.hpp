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
#include <random>
#include <vector>

namespace voxnorm {

/// Seeded random source with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose raw sequence the C++ standard fixes.
/// The standard library distributions are implementation-defined, so every
/// derived quantity is computed here:
///   uniform()  = (u64 >> 11) * 2^-53                      in [0, 1)
///   normal()   = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)       (Box-Muller, one
///                value per call, two draws consumed)
///   below(n)   = rejection sampling on u64 with threshold (2^64 - n) mod n
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal scaled by `stddev`, redrawn until |x| <= bound * stddev.
  double truncated_normal(double stddev, double bound = 2.0);

  /// Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace voxnorm
