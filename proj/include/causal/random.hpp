// Copyright 2026 The Causal Retrieval Authors
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

#ifndef CAUSAL_RANDOM_HPP_
#define CAUSAL_RANDOM_HPP_

#include <algorithm>
#include <cstdint>
#include <random>

namespace causal {

// All randomness in the library flows through this engine so that results
// are a pure function of (inputs, seed).
using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent sub-seeds from a base seed and a
// stream tag (e.g. epoch index, encoder role).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

// Uniform index in [0, n). std::uniform_int_distribution is not specified
// bit-for-bit across standard libraries, so the reduction is done here.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Reject the low 2^64 mod n values so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x = rng();
  while (x < threshold) x = rng();
  return x % n;
}

// Uniform real in [lo, hi) built from 53 random bits.
inline double uniform_real(Rng& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

// Fisher-Yates with the portable index draw. Shuffling the same length with
// the same engine state gives the same permutation on every platform.
//
// The forward form is used so that the first m positions only depend on the
// first m draws: shuffling with the same seed and reading a longer prefix
// extends a shorter one.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = 0; i + 1 < n; ++i) {
    const std::uint64_t j = i + uniform_index(rng, n - i);
    std::iter_swap(first + i, first + j);
  }
}

}  // namespace causal

#endif  // CAUSAL_RANDOM_HPP_
