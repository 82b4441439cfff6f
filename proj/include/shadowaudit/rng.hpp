// Copyright 2026 The shadow-audit Authors
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

#include "shadowaudit/error.hpp"

namespace shadowaudit {

inline constexpr const char* kRngAlgorithm = "mt19937_64";

/// splitmix64 step. Used to mix seeds and derive independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a substream seed from a root seed and up to three tags.
/// Same inputs always give the same output on every platform.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag0,
                                 std::uint64_t tag1 = 0, std::uint64_t tag2 = 0) {
  std::uint64_t s = root;
  std::uint64_t h = splitmix64(s);
  s ^= tag0 * 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= tag1 * 0xc2b2ae3d27d4eb4fULL;
  h ^= splitmix64(s);
  s ^= tag2 * 0x165667b19e3779f9ULL;
  h ^= splitmix64(s);
  return h;
}

/// Deterministic random source. std::mt19937_64 has a fully specified
/// output sequence, but the std distributions do not, so every draw here
/// is implemented by hand and is bit-portable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound) via rejection sampling, bias-free.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) fail(ErrorCode::InvalidConfig, "uniform_below: bound must be positive");
    if ((bound & (bound - 1)) == 0) return engine_() & (bound - 1);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Index draw from unnormalized non-negative weights.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) fail(ErrorCode::InvalidConfig, "categorical: weights sum to zero");
    double x = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return weights.size() - 1;
  }

  /// Fisher-Yates shuffle, uses this generator's portable draws.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace shadowaudit
