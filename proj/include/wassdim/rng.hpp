// Copyright 2026 The Wassdim Authors. All Rights Reserved.
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
#include <cmath>
#include <cstdint>

namespace wassdim {

// splitmix64 step. Used for seed expansion and stream derivation only.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream-splitting rule: every operation that consumes randomness derives its
// own substream as derive_seed(user_seed, tag), where the tag identifies the
// operation (and, where needed, the scale / repetition index). Nested splits
// chain derive_seed calls. This keeps all generators independent of call
// order across operations.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64_next(s);
  s ^= tag * 0x9e3779b97f4a7c15ull;
  std::uint64_t b = splitmix64_next(s);
  return a ^ (b + 0x632be59bd9b4e019ull + (a << 6) + (a >> 2));
}

// Operation tags for the stream-splitting rule above.
namespace stream {
inline constexpr std::uint64_t kSphere = 0x5350'4845'5245'0001ull;
inline constexpr std::uint64_t kEmbed = 0x454d'4245'4444'0002ull;
inline constexpr std::uint64_t kSwissRoll = 0x5357'4953'5300'0003ull;
inline constexpr std::uint64_t kBall = 0x4241'4c4c'0000'0004ull;
inline constexpr std::uint64_t kSplitPlan = 0x5350'4c49'5400'0005ull;
inline constexpr std::uint64_t kFreshDraw = 0x4652'4553'4800'0006ull;
inline constexpr std::uint64_t kMleSample = 0x4d4c'4553'4d50'0007ull;
inline constexpr std::uint64_t kFixture = 0x4649'5854'5552'0008ull;
}  // namespace stream

// xoshiro256++ with splitmix64 seeding. Self-contained so that sequences are
// identical on every platform; <random> distributions are implementation
// defined and would break the bit-determinism contract of the generators.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  // Standard normal via Box-Muller. Consumes exactly two uniforms per call
  // (no cached spare), so the draw sequence is trivially reproducible.
  double normal() {
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    const double u2 = next_double();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace wassdim
