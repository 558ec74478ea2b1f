// Copyright 2026 The ggsim Authors.
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

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace ggsim {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Steele/Lea/Flood construction via Vigna).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

// Counter-based splittable stream. Output i of a stream with key k is
// mix64(k + (i+1)*golden); a child stream's key is a keyed hash of
// (parent key, child index). Identical (seed, path) pairs therefore yield
// identical sequences regardless of scheduling, and sibling streams are
// statistically independent (smoke-tested, not proved).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed)
      : key_(seed), root_seed_(seed) {}

  RandomStream derive(std::uint32_t child) const {
    RandomStream s(*this);
    s.key_ = detail::mix64(detail::mix64(key_ ^ 0xD1B54A32D192ED03ULL) +
                           (static_cast<std::uint64_t>(child) + 1) *
                               detail::kGolden);
    s.counter_ = 0;
    s.path_.push_back(child);
    return s;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unit-rate exponential.
  double exponential() { return -std::log1p(-uniform01()); }

  // Symmetric sign, +1 or -1 with probability 1/2.
  int sign() { return (next_u64() >> 63) ? 1 : -1; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) %
           n;
  }

  std::uint64_t root_seed() const { return root_seed_; }
  std::uint64_t key() const { return key_; }
  const std::vector<std::uint32_t>& path() const { return path_; }

  // "seed/c0/c1/..." provenance string for report records.
  std::string path_string() const {
    std::string s = std::to_string(root_seed_);
    for (auto c : path_) {
      s += '/';
      s += std::to_string(c);
    }
    return s;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t root_seed_;
  std::vector<std::uint32_t> path_;
};

inline RandomStream derive_stream(const RandomStream& parent,
                                  std::uint32_t child) {
  return parent.derive(child);
}

}  // namespace ggsim
