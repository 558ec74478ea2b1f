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
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ggsim/rng.hpp"

namespace ggsim {

// Normalized atom weights, kept in atom-slot order so transforms and overlap
// lookups stay aligned. The canonical non-increasing arrangement plus the
// permutation back to slots is a derived view.
class WeightVector {
 public:
  // Normalizes nonnegative masses. Throws UsageError on negative, non-finite
  // or all-zero input.
  explicit WeightVector(std::vector<double> masses);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t slot) const { return w_[slot]; }
  const std::vector<double>& slots() const { return w_; }

  struct Canonical {
    std::vector<double> sorted;        // non-increasing
    std::vector<std::uint32_t> order;  // sorted position -> slot
  };
  Canonical canonical() const;

  // Slots of the L heaviest atoms, ties broken by slot index.
  std::vector<std::uint32_t> top_atoms(std::size_t L) const;

  double sum() const;  // compensated; 1 within 1e-12 by construction

 private:
  std::vector<double> w_;
};

// Dense symmetric Gram matrix of atom scalar products.
struct GramOverlaps {
  std::size_t dim = 0;
  std::vector<double> g;  // row-major, dim*dim

  double at(std::size_t i, std::size_t j) const { return g[i * dim + j]; }
  double self_overlap(std::size_t i) const { return at(i, i); }
};

// Implicit complete c-ary tree of depth r; atom i is the i-th leaf in
// path-lexicographic order. The overlap of two atoms is q at the depth of
// their deepest common ancestor (0 at the root, which is not in qs), and the
// self-overlap is qs[r-1].
struct TreeOverlaps {
  std::uint32_t branching = 2;  // c >= 2
  std::uint32_t levels = 1;     // r >= 1
  std::vector<double> qs;       // size r, strictly increasing, within [0,1]

  std::size_t leaf_count() const;
  int lca_depth(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j) const {
    const int d = lca_depth(i, j);
    return d == 0 ? 0.0 : qs[static_cast<std::size_t>(d) - 1];
  }
  double self_overlap(std::size_t) const { return qs.back(); }
  // Overlap value for an ancestor depth d in [0, r].
  double q_at_depth(int d) const {
    return d == 0 ? 0.0 : qs[static_cast<std::size_t>(d) - 1];
  }
};

using OverlapModel = std::variant<GramOverlaps, TreeOverlaps>;

std::size_t overlap_dim(const OverlapModel& model);
double overlap_at(const OverlapModel& model, std::size_t i, std::size_t j);

// One realization of the random measure: weights, overlap structure and the
// atom labels of the retained (truncated) support.
class MeasureSample {
 public:
  MeasureSample(WeightVector weights, OverlapModel overlaps,
                std::vector<std::uint64_t> labels, std::uint64_t seed = 0);

  std::size_t atom_count() const { return weights_.size(); }
  const WeightVector& weights() const { return weights_; }
  const OverlapModel& overlaps() const { return overlaps_; }
  const std::vector<std::uint64_t>& labels() const { return labels_; }
  std::uint64_t seed() const { return seed_; }

  bool is_tree() const {
    return std::holds_alternative<TreeOverlaps>(overlaps_);
  }
  const TreeOverlaps* tree() const {
    return std::get_if<TreeOverlaps>(&overlaps_);
  }

  // Replacement sample sharing the same overlap model and labels.
  MeasureSample with_weights(WeightVector w) const;

  std::string to_json() const;

 private:
  WeightVector weights_;
  OverlapModel overlaps_;
  std::vector<std::uint64_t> labels_;
  std::uint64_t seed_;
};

// Overlap of atoms i and j of a sample; symmetric, overlap(i,i) is the
// self-overlap. Throws UsageError on out-of-range indices.
double overlap(const MeasureSample& sample, std::size_t i, std::size_t j);

// Parameters of a truncated hierarchical cascade.
struct CascadeParams {
  std::vector<double> zetas;    // 0 < z1 < ... < zr < 1
  std::vector<double> qs;       // 0 <= q1 < ... < qr <= 1
  std::uint32_t branching = 2;  // children kept per node, >= 2

  std::uint32_t levels() const {
    return static_cast<std::uint32_t>(zetas.size());
  }
  void validate() const;  // throws UsageError
};

// K largest normalized atoms of a Poisson-Dirichlet PD(zeta, 0) measure,
// built from Poisson arrival times so the output arrives sorted.
WeightVector sample_pd(double zeta, std::uint32_t K, RandomStream& rng);

// Truncated cascade sample with branching^levels atoms and tree overlaps.
MeasureSample sample_rpc(const CascadeParams& params, RandomStream& rng);

// Deterministic measure (point-mass law) used as a negative control.
// Weights are normalized; the Gram matrix must satisfy the overlap-model
// invariants.
MeasureSample negative_control(std::vector<double> weights,
                               std::vector<double> gram_row_major);

// Validates every sample invariant (weights, overlap ranges, PSD for Gram
// models, ultrametricity spot checks for tree models). Throws UsageError
// with a description of the first violation.
void validate_sample(const MeasureSample& sample);

// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi); used by the
// Gram PSD validation and exposed for tests.
double min_symmetric_eigenvalue(std::span<const double> row_major,
                                std::size_t dim);

}  // namespace ggsim
