// Copyright 2026 The Wavemux Authors. All Rights Reserved.
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

#ifndef WAVEMUX_RNG_HPP_
#define WAVEMUX_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace wavemux {

// SplitMix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator. The value at position `counter` of stream
// `stream` under `seed` is
//
//   state = splitmix64(seed ^ splitmix64(stream ^ 0x5851f42d4c957f2d))
//   value = splitmix64(state + counter * 0x9e3779b97f4a7c15)
//
// so any element can be computed independently of the others, and two
// implementations that follow the formula produce identical sequences.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : state_(splitmix64(seed ^ splitmix64(stream ^ 0x5851f42d4c957f2dULL))) {}

  constexpr std::uint64_t at(std::uint64_t counter) const {
    return splitmix64(state_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }

  // +1 or -1.
  constexpr double sign_at(std::uint64_t counter) const {
    return (at(counter) >> 63) ? -1.0 : 1.0;
  }

  // Sequential access.
  std::uint64_t next() { return at(position_++); }
  double uniform() { return uniform_at(position_++); }

  // Box-Muller; consumes two positions.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n). n must be non-zero.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; the tiny bias is irrelevant for our n.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
  std::uint64_t position_ = 0;
};

// Stream identifiers so that different consumers of one seed never overlap.
namespace rng_stream {
inline constexpr std::uint64_t kSsChips = 1;
inline constexpr std::uint64_t kQimBins = 2;
inline constexpr std::uint64_t kQimDither = 3;
inline constexpr std::uint64_t kPhaseBins = 4;
inline constexpr std::uint64_t kPhaseDither = 5;
inline constexpr std::uint64_t kPhaseSigns = 6;
inline constexpr std::uint64_t kAttack = 16;
inline constexpr std::uint64_t kRir = 17;
inline constexpr std::uint64_t kCorpus = 32;
inline constexpr std::uint64_t kPayload = 33;
}  // namespace rng_stream

}  // namespace wavemux

#endif  // WAVEMUX_RNG_HPP_
