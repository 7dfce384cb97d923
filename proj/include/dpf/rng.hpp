// Copyright 2026 The dpfilter Authors
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

#ifndef DPF_RNG_HPP_
#define DPF_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>

namespace dpf::rng {

// Philox-4x32-10 counter-based generator (Salmon et al., SC 2011). Each
// 128-bit counter block maps to independent output words, so streams are
// addressed rather than advanced: identical (seed, counter) pairs give
// identical draws on every platform and thread layout.

namespace detail {

constexpr uint32_t kWeylA = 0x9E3779B9u;
constexpr uint32_t kWeylB = 0xBB67AE85u;
constexpr uint32_t kMultA = 0xD2511F53u;
constexpr uint32_t kMultB = 0xCD9E8D57u;

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t* hi, uint32_t* lo) {
  const uint64_t p = static_cast<uint64_t>(a) * b;
  *hi = static_cast<uint32_t>(p >> 32);
  *lo = static_cast<uint32_t>(p);
}

}  // namespace detail

inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
  using namespace detail;
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kMultA, ctr[0], &hi0, &lo0);
    mul_hi_lo(kMultB, ctr[2], &hi1, &lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

/// Stream address: (trial, stream) select an independent substream; `index`
/// walks along it. Streams encode participant and noise-source identity.
struct StreamId {
  uint32_t trial = 0;
  uint32_t stream = 0;
};

inline uint64_t bits64(uint64_t seed, StreamId id, uint64_t index) {
  const std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(index),
                                       static_cast<uint32_t>(index >> 32), id.stream, id.trial};
  const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                       static_cast<uint32_t>(seed >> 32)};
  const auto out = philox4x32(ctr, key);
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

/// Uniform draw on (0, 1] with 53-bit resolution.
inline double uniform01(uint64_t seed, StreamId id, uint64_t index) {
  const uint64_t v = bits64(seed, id, index);
  return ((v >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on one counter block (both 64-bit halves
/// of the block feed the transform; one block per draw keeps the stream
/// random-access).
inline double normal(uint64_t seed, StreamId id, uint64_t index) {
  const std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(index),
                                       static_cast<uint32_t>(index >> 32), id.stream, id.trial};
  const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                       static_cast<uint32_t>(seed >> 32)};
  const auto out = philox4x32(ctr, key);
  const uint64_t a = (static_cast<uint64_t>(out[0]) << 32) | out[1];
  const uint64_t b = (static_cast<uint64_t>(out[2]) << 32) | out[3];
  const double u1 = ((a >> 11) + 1) * 0x1.0p-53;
  const double u2 = ((b >> 11) + 1) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace dpf::rng

#endif  // DPF_RNG_HPP_
