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

#include <cstdint>
#include <vector>

#include "ggsim/measure.hpp"
#include "ggsim/rng.hpp"

namespace ggsim {

// Per-atom symmetric signs, one per slot.
struct SignVector {
  std::vector<std::int8_t> eps;  // entries exactly +1 or -1
  std::size_t size() const { return eps.size(); }
};

// Per-atom retention indicators; each is 1 with probability 1/2^s.
struct RetentionVector {
  std::vector<std::uint8_t> eta;  // entries exactly 0 or 1
  std::uint32_t s = 1;
  std::size_t size() const { return eta.size(); }
};

SignVector draw_signs(std::size_t K, RandomStream& rng);
RetentionVector draw_retention(std::size_t K, std::uint32_t s,
                               RandomStream& rng);

// eta = (eps + 1) / 2, the coupling used by the large-t limit comparison.
RetentionVector retention_from_signs(const SignVector& eps);

// Exponential change of density w_i -> w_i e^{t eps_i} / Z. Overlaps and
// labels are untouched; the normalizer is stabilized by factoring out the
// largest exponent over positive-weight atoms. t == 0 returns the sample
// unchanged.
MeasureSample tilt(const MeasureSample& sample, double t,
                   const SignVector& eps);

// Keeps atoms with eta_i = 1 and renormalizes. Deleted atoms keep their
// slots with weight zero so overlap matrices stay aligned. Throws
// DegenerateDeletionError when no retained atom carries mass.
MeasureSample delete_atoms(const MeasureSample& sample,
                           const RetentionVector& eta);

// Fraction of mass the retention vector keeps (the deletion denominator).
double retained_mass(const MeasureSample& sample, const RetentionVector& eta);

enum class DeletionMode {
  SingleShot,   // one pass with retention probability 1/2^s
  Sequential,   // s successive fair deletions
};

// Random deletion with retention probability 1/2^s. Degenerate draws retry
// with fresh retention vectors, up to max_retries per pass; the number of
// retries is reported through *retries when given. Both code paths realize
// the same law and are tested for distributional agreement.
MeasureSample iterated_delete(const MeasureSample& sample, std::uint32_t s,
                              RandomStream& rng,
                              DeletionMode mode = DeletionMode::SingleShot,
                              int max_retries = 100,
                              std::uint64_t* retries = nullptr);

}  // namespace ggsim
