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

#include "ggsim/transforms.hpp"

#include <cmath>
#include <limits>

#include "ggsim/errors.hpp"
#include "ggsim/numeric.hpp"

namespace ggsim {

SignVector draw_signs(std::size_t K, RandomStream& rng) {
  if (K < 1) throw UsageError("draw_signs: K must be >= 1");
  SignVector v;
  v.eps.resize(K);
  for (auto& e : v.eps) e = static_cast<std::int8_t>(rng.sign());
  return v;
}

RetentionVector draw_retention(std::size_t K, std::uint32_t s,
                               RandomStream& rng) {
  if (K < 1) throw UsageError("draw_retention: K must be >= 1");
  if (s < 1) throw UsageError("draw_retention: s must be >= 1");
  const double keep = std::ldexp(1.0, -static_cast<int>(s));  // 1/2^s
  RetentionVector v;
  v.s = s;
  v.eta.resize(K);
  for (auto& e : v.eta) e = rng.bernoulli(keep) ? 1 : 0;
  return v;
}

RetentionVector retention_from_signs(const SignVector& eps) {
  RetentionVector v;
  v.s = 1;
  v.eta.resize(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    v.eta[i] = eps.eps[i] > 0 ? 1 : 0;
  }
  return v;
}

MeasureSample tilt(const MeasureSample& sample, double t,
                   const SignVector& eps) {
  const auto& w = sample.weights().slots();
  if (eps.size() != w.size()) {
    throw UsageError("tilt: sign vector length must match the atom count");
  }
  if (t == 0.0) return sample;
  // Largest exponent among atoms that carry mass; keeps e^{t eps - shift}
  // within range for any t the limit tests exercise.
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) shift = std::max(shift, t * eps.eps[i]);
  }
  std::vector<double> tilted(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    tilted[i] = w[i] == 0.0 ? 0.0 : w[i] * std::exp(t * eps.eps[i] - shift);
  }
  return sample.with_weights(WeightVector(std::move(tilted)));
}

double retained_mass(const MeasureSample& sample, const RetentionVector& eta) {
  const auto& w = sample.weights().slots();
  if (eta.size() != w.size()) {
    throw UsageError("retained_mass: retention length must match atom count");
  }
  NeumaierSum total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (eta.eta[i]) total.add(w[i]);
  }
  return total.value();
}

MeasureSample delete_atoms(const MeasureSample& sample,
                           const RetentionVector& eta) {
  const auto& w = sample.weights().slots();
  if (eta.size() != w.size()) {
    throw UsageError("delete_atoms: retention length must match atom count");
  }
  if (!(retained_mass(sample, eta) > 0.0)) {
    throw DegenerateDeletionError(
        "delete_atoms: every retained atom carries zero mass");
  }
  std::vector<double> kept(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    kept[i] = eta.eta[i] ? w[i] : 0.0;
  }
  return sample.with_weights(WeightVector(std::move(kept)));
}

MeasureSample iterated_delete(const MeasureSample& sample, std::uint32_t s,
                              RandomStream& rng, DeletionMode mode,
                              int max_retries, std::uint64_t* retries) {
  if (s < 1) throw UsageError("iterated_delete: s must be >= 1");
  std::uint64_t attempts_used = 0;
  auto delete_once = [&](const MeasureSample& in,
                         std::uint32_t step_s) -> MeasureSample {
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
      const RetentionVector eta = draw_retention(in.atom_count(), step_s, rng);
      if (retained_mass(in, eta) > 0.0) {
        attempts_used += static_cast<std::uint64_t>(attempt);
        return delete_atoms(in, eta);
      }
    }
    attempts_used += static_cast<std::uint64_t>(max_retries);
    throw DegenerateDeletionError(
        "iterated_delete: no surviving mass after " +
        std::to_string(max_retries) + " retries");
  };
  MeasureSample out = [&]() {
    if (mode == DeletionMode::SingleShot) return delete_once(sample, s);
    MeasureSample cur = sample;
    for (std::uint32_t round = 0; round < s; ++round) {
      cur = delete_once(cur, 1);
    }
    return cur;
  }();
  if (retries != nullptr) *retries = attempts_used;
  return out;
}

}  // namespace ggsim
