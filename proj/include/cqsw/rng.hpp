// Copyright 2026 The cqsw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based random substreams. Every consumer derives its generator from
// (master seed, stream id, counter), so draws never depend on execution order.

#pragma once

#include <cstdint>
#include <random>

namespace cqsw {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0) noexcept {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

namespace streams {
inline constexpr std::uint64_t kCandidateOrder = 0x636f6465;  // "code"
inline constexpr std::uint64_t kTrials = 0x7472696c;         // "tril"
}  // namespace streams

/// Generator for one substream. Uniform doubles use the top 53 bits directly so
/// values are identical across standard library implementations.
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0)
      : engine_(derive_seed(seed, stream, counter)) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1).
  double uniform_open() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cqsw
