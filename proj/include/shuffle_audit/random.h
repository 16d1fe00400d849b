/*
 * Copyright 2026 The shuffle-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Counter-based pseudo-random streams. Every draw is a pure function of
// (key, counter), so results never depend on the standard library's
// distribution implementations or on thread scheduling.

#ifndef SHUFFLE_AUDIT_RANDOM_H_
#define SHUFFLE_AUDIT_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace shuffle_audit {

inline constexpr uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr uint64_t SplitMix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a, 64-bit.
constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

uint64_t Fnv1a64(std::span<const unsigned char> bytes,
                 uint64_t state = kFnvOffset);
uint64_t Fnv1a64(std::string_view text, uint64_t state = kFnvOffset);

// Feeds the IEEE-754 bit pattern of each value, little-endian byte order.
uint64_t Fnv1a64Doubles(std::span<const double> values,
                        uint64_t state = kFnvOffset);

// Derives an independent key from a parent key and a tag.
constexpr uint64_t DeriveSeed(uint64_t seed, uint64_t tag) {
  return SplitMix64(seed ^ SplitMix64(tag + kGoldenGamma));
}
uint64_t DeriveSeed(uint64_t seed, std::string_view tag);

class CounterStream {
 public:
  explicit CounterStream(uint64_t key) : key_(key) {}

  uint64_t NextU64() { return SplitMix64(key_ + kGoldenGamma * ++counter_); }

  // Uniform in [0, 1) with 53 random bits.
  double NextUniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). bound must be > 0.
  uint64_t NextBelow(uint64_t bound);

  // Standard normal via Box-Muller (one value per call, no caching).
  double NextNormal();

  bool NextBernoulli(double p) { return NextUniform() < p; }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

// Fisher-Yates permutation of [0, n).
std::vector<size_t> RandomPermutation(size_t n, CounterStream& stream);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_RANDOM_H_
