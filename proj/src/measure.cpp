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

#include "ggsim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ggsim/errors.hpp"
#include "ggsim/numeric.hpp"

namespace ggsim {

namespace {
constexpr double kSumTolerance = 1e-12;
constexpr double kPsdTolerance = -1e-9;
}  // namespace

WeightVector::WeightVector(std::vector<double> masses) : w_(std::move(masses)) {
  if (w_.empty()) throw UsageError("WeightVector: needs at least one atom");
  NeumaierSum total;
  for (double x : w_) {
    if (!std::isfinite(x)) throw UsageError("WeightVector: non-finite mass");
    if (x < 0.0) throw UsageError("WeightVector: negative mass");
    total.add(x);
  }
  const double s = total.value();
  if (!(s > 0.0)) throw UsageError("WeightVector: total mass must be positive");
  for (double& x : w_) x /= s;
}

WeightVector::Canonical WeightVector::canonical() const {
  Canonical c;
  c.order.resize(w_.size());
  std::iota(c.order.begin(), c.order.end(), 0u);
  std::stable_sort(c.order.begin(), c.order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return w_[a] > w_[b];
                   });
  c.sorted.reserve(w_.size());
  for (auto s : c.order) c.sorted.push_back(w_[s]);
  return c;
}

std::vector<std::uint32_t> WeightVector::top_atoms(std::size_t L) const {
  L = std::min(L, w_.size());
  std::vector<std::uint32_t> idx(w_.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(L), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (w_[a] != w_[b]) return w_[a] > w_[b];
                      return a < b;
                    });
  idx.resize(L);
  return idx;
}

double WeightVector::sum() const { return compensated_sum(w_); }

std::size_t TreeOverlaps::leaf_count() const {
  std::size_t n = 1;
  for (std::uint32_t d = 0; d < levels; ++d) n *= branching;
  return n;
}

int TreeOverlaps::lca_depth(std::size_t i, std::size_t j) const {
  int d = static_cast<int>(levels);
  while (i != j) {
    i /= branching;
    j /= branching;
    --d;
  }
  return d;
}

std::size_t overlap_dim(const OverlapModel& model) {
  if (const auto* g = std::get_if<GramOverlaps>(&model)) return g->dim;
  return std::get<TreeOverlaps>(model).leaf_count();
}

double overlap_at(const OverlapModel& model, std::size_t i, std::size_t j) {
  if (const auto* g = std::get_if<GramOverlaps>(&model)) return g->at(i, j);
  return std::get<TreeOverlaps>(model).at(i, j);
}

MeasureSample::MeasureSample(WeightVector weights, OverlapModel overlaps,
                             std::vector<std::uint64_t> labels,
                             std::uint64_t seed)
    : weights_(std::move(weights)),
      overlaps_(std::move(overlaps)),
      labels_(std::move(labels)),
      seed_(seed) {
  const std::size_t K = weights_.size();
  if (overlap_dim(overlaps_) != K || labels_.size() != K) {
    throw UsageError(
        "MeasureSample: weights, overlap dimension and labels must agree");
  }
}

MeasureSample MeasureSample::with_weights(WeightVector w) const {
  return MeasureSample(std::move(w), overlaps_, labels_, seed_);
}

double overlap(const MeasureSample& sample, std::size_t i, std::size_t j) {
  const std::size_t K = sample.atom_count();
  if (i >= K || j >= K) throw UsageError("overlap: atom index out of range");
  return overlap_at(sample.overlaps(), i, j);
}

std::string MeasureSample::to_json() const {
  nlohmann::ordered_json doc;
  doc["seed"] = seed_;
  doc["weights"] = weights_.slots();
  doc["labels"] = labels_;
  if (const auto* t = std::get_if<TreeOverlaps>(&overlaps_)) {
    doc["overlaps"] = {{"model", "tree"},
                       {"branching", t->branching},
                       {"levels", t->levels},
                       {"q", t->qs}};
  } else {
    const auto& g = std::get<GramOverlaps>(overlaps_);
    doc["overlaps"] = {{"model", "gram"}, {"dim", g.dim}, {"entries", g.g}};
  }
  return doc.dump();
}

void CascadeParams::validate() const {
  if (zetas.empty()) throw UsageError("CascadeParams: needs at least 1 level");
  if (qs.size() != zetas.size()) {
    throw UsageError("CascadeParams: zetas and qs must have equal length");
  }
  if (branching < 2) throw UsageError("CascadeParams: branching must be >= 2");
  double prev = 0.0;
  for (std::size_t i = 0; i < zetas.size(); ++i) {
    if (!(zetas[i] > 0.0 && zetas[i] < 1.0)) {
      throw UsageError("CascadeParams: zetas must lie strictly in (0,1)");
    }
    if (i > 0 && !(zetas[i] > zetas[i - 1])) {
      throw UsageError("CascadeParams: zetas must be strictly increasing");
    }
    if (!(qs[i] >= 0.0 && qs[i] <= 1.0)) {
      throw UsageError("CascadeParams: qs must lie within [0,1]");
    }
    if (i > 0 && !(qs[i] > prev)) {
      throw UsageError("CascadeParams: qs must be strictly increasing");
    }
    prev = qs[i];
  }
}

namespace {

// Log atom magnitudes of one PD(zeta) node: -log(eta_k)/zeta for eta_k the
// Poisson arrival times. Arrivals increase, so magnitudes come out sorted.
void pd_log_factors(double zeta, std::uint32_t count, RandomStream& rng,
                    std::span<double> out) {
  double arrival = 0.0;
  for (std::uint32_t k = 0; k < count; ++k) {
    arrival += rng.exponential();
    out[k] = -std::log(arrival) / zeta;
  }
}

WeightVector normalize_from_logs(std::vector<double>& logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  for (double& x : logs) x = std::exp(x - top);
  return WeightVector(std::move(logs));
}

}  // namespace

WeightVector sample_pd(double zeta, std::uint32_t K, RandomStream& rng) {
  if (!(zeta > 0.0 && zeta < 1.0)) {
    throw UsageError("sample_pd: zeta must lie strictly in (0,1)");
  }
  if (K < 1) throw UsageError("sample_pd: K must be >= 1");
  std::vector<double> logs(K);
  pd_log_factors(zeta, K, rng, logs);
  return normalize_from_logs(logs);
}

MeasureSample sample_rpc(const CascadeParams& params, RandomStream& rng) {
  params.validate();
  const std::uint32_t r = params.levels();
  const std::uint32_t c = params.branching;
  TreeOverlaps tree{c, r, params.qs};
  const std::size_t K = tree.leaf_count();

  // Leaf log-weight = sum of node log-factors along the path. Nodes draw in
  // breadth-first order from the caller's stream, so the construction is a
  // pure function of (params, stream) and a one-level cascade consumes the
  // stream exactly like sample_pd.
  std::vector<double> logs(K, 0.0);
  std::size_t nodes_at_depth = 1;
  std::size_t block = K;  // leaves under one node at the current depth
  for (std::uint32_t depth = 0; depth < r; ++depth) {
    const std::size_t child_block = block / c;
    std::vector<double> factors(c);
    for (std::size_t node = 0; node < nodes_at_depth; ++node) {
      pd_log_factors(params.zetas[depth], c, rng, factors);
      const std::size_t base = node * block;
      for (std::uint32_t child = 0; child < c; ++child) {
        const std::size_t lo = base + child * child_block;
        for (std::size_t leaf = lo; leaf < lo + child_block; ++leaf) {
          logs[leaf] += factors[child];
        }
      }
    }
    nodes_at_depth *= c;
    block = child_block;
  }

  WeightVector weights = normalize_from_logs(logs);
  std::vector<std::uint64_t> labels(K);
  std::iota(labels.begin(), labels.end(), 0u);
  return MeasureSample(std::move(weights), std::move(tree), std::move(labels),
                       rng.root_seed());
}

MeasureSample negative_control(std::vector<double> weights,
                               std::vector<double> gram_row_major) {
  WeightVector w(std::move(weights));
  const std::size_t K = w.size();
  if (gram_row_major.size() != K * K) {
    throw UsageError("negative_control: gram must be K x K");
  }
  GramOverlaps gram{K, std::move(gram_row_major)};
  std::vector<std::uint64_t> labels(K);
  std::iota(labels.begin(), labels.end(), 0u);
  MeasureSample sample(std::move(w), std::move(gram), std::move(labels), 0);
  validate_sample(sample);
  return sample;
}

double min_symmetric_eigenvalue(std::span<const double> row_major,
                                std::size_t dim) {
  // Cyclic Jacobi with a fixed sweep budget; ample for validation sizes.
  std::vector<double> a(row_major.begin(), row_major.end());
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return a[i * dim + j];
  };
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t q = p + 1; q < dim; ++q) off += at(p, q) * at(p, q);
    }
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t q = p + 1; q < dim; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cos = 1.0 / std::sqrt(t * t + 1.0);
        const double sin = t * cos;
        for (std::size_t k = 0; k < dim; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = cos * akp - sin * akq;
          at(k, q) = sin * akp + cos * akq;
        }
        for (std::size_t k = 0; k < dim; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = cos * apk - sin * aqk;
          at(q, k) = sin * apk + cos * aqk;
        }
      }
    }
  }
  double lo = at(0, 0);
  for (std::size_t i = 1; i < dim; ++i) lo = std::min(lo, at(i, i));
  return lo;
}

void validate_sample(const MeasureSample& sample) {
  const auto& w = sample.weights().slots();
  NeumaierSum total;
  for (double x : w) {
    if (!(x >= 0.0)) throw UsageError("sample: negative weight");
    total.add(x);
  }
  if (std::abs(total.value() - 1.0) > kSumTolerance) {
    throw UsageError("sample: weights do not sum to 1 within 1e-12");
  }

  if (const auto* g = std::get_if<GramOverlaps>(&sample.overlaps())) {
    for (std::size_t i = 0; i < g->dim; ++i) {
      for (std::size_t j = 0; j < g->dim; ++j) {
        const double v = g->at(i, j);
        if (!(v >= -1.0 && v <= 1.0)) {
          throw UsageError("sample: overlap outside [-1,1]");
        }
        if (std::abs(v - g->at(j, i)) > 1e-12) {
          throw UsageError("sample: gram not symmetric");
        }
        if (i != j &&
            v > std::min(g->self_overlap(i), g->self_overlap(j)) + 1e-12) {
          throw UsageError("sample: off-diagonal overlap exceeds self-overlap");
        }
      }
    }
    if (min_symmetric_eigenvalue(g->g, g->dim) < kPsdTolerance) {
      throw UsageError("sample: gram matrix is not positive semi-definite");
    }
  } else {
    const auto& t = std::get<TreeOverlaps>(sample.overlaps());
    if (t.branching < 2 || t.levels < 1 || t.qs.size() != t.levels) {
      throw UsageError("sample: malformed tree overlap model");
    }
    double prev = -1.0;
    for (double q : t.qs) {
      if (!(q >= 0.0 && q <= 1.0 && q > prev)) {
        throw UsageError("sample: tree qs must increase within [0,1]");
      }
      prev = q;
    }
    // Ultrametricity R_ij >= min(R_ik, R_jk) on deterministic index triples;
    // it holds structurally, so a sweep over a coarse triple grid suffices.
    const std::size_t K = sample.atom_count();
    const std::size_t step = std::max<std::size_t>(1, K / 8);
    for (std::size_t i = 0; i < K; i += step) {
      for (std::size_t j = 0; j < K; j += step) {
        for (std::size_t k = 0; k < K; k += step) {
          const double rij = t.at(i, j);
          if (rij < std::min(t.at(i, k), t.at(j, k)) - 1e-15) {
            throw UsageError("sample: tree overlaps are not ultrametric");
          }
        }
      }
    }
  }
}

}  // namespace ggsim
