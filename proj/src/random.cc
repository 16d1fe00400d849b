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

#include "shuffle_audit/random.h"

#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace shuffle_audit {

uint64_t Fnv1a64(std::span<const unsigned char> bytes, uint64_t state) {
  for (unsigned char b : bytes) {
    state ^= b;
    state *= kFnvPrime;
  }
  return state;
}

uint64_t Fnv1a64(std::string_view text, uint64_t state) {
  for (char c : text) {
    state ^= static_cast<unsigned char>(c);
    state *= kFnvPrime;
  }
  return state;
}

uint64_t Fnv1a64Doubles(std::span<const double> values, uint64_t state) {
  for (double v : values) {
    const auto bits = std::bit_cast<uint64_t>(v);
    for (int shift = 0; shift < 64; shift += 8) {
      state ^= (bits >> shift) & 0xffU;
      state *= kFnvPrime;
    }
  }
  return state;
}

uint64_t DeriveSeed(uint64_t seed, std::string_view tag) {
  return DeriveSeed(seed, Fnv1a64(tag));
}

uint64_t CounterStream::NextBelow(uint64_t bound) {
  // Rejection sampling keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t r;
  do {
    r = NextU64();
  } while (r >= limit);
  return r % bound;
}

double CounterStream::NextNormal() {
  double u1 = NextUniform();
  const double u2 = NextUniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<size_t> RandomPermutation(size_t n, CounterStream& stream) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  for (size_t i = n; i > 1; --i) {
    const size_t j = stream.NextBelow(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace shuffle_audit
