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

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ggsim/gibbs.hpp"
#include "ggsim/transforms.hpp"

namespace ggsim {

struct CheckBudget {
  std::uint64_t m_outer = 2000;
  std::uint64_t m_inner = 1024;
};

struct RunPolicy {
  double level = kDefaultZLevel;  // two-sided z level (threshold 3 by default)
  double abs_floor = 0.01;        // absolute equality floor
  InnerPolicy inner;
  int jobs = 1;
  double time_limit_s = 600.0;  // per check grid
};

// Equality verdict used by every invariance check: pass when |z| is within
// the threshold or |difference| is within the absolute floor (the floor
// guards against truncation bias dominating at very large budgets).
TestVerdict equality_verdict(double difference, double se,
                             const RunPolicy& policy);

// ---------------------------------------------------------------------------
// Ghirlanda-Guerra residual
// ---------------------------------------------------------------------------

struct GGCheckSpec {
  int n = 2;  // replica count, >= 2
  int p = 1;  // overlap power, >= 1
  OverlapFunction f;
  CheckBudget budget;
};

struct GGResidualReport {
  MCEstimate lhs, rhs, residual;
  TestVerdict verdict;
  std::string function_id;
  int n = 2;
  int p = 1;
  std::string seed_path;
};

// Estimates lhs = E<f R_{1,n+1}^p> against
// rhs = (1/n) E<f> E<R_{1,2}^p> + (1/n) sum_{l=2..n} E<f R_{1,l}^p>.
// With pair_sides (default) the same measure samples feed every term; the
// residual's standard error comes from the delta method over the
// per-replication term vector.
GGResidualReport gg_residual(const SamplerSpec& sampler,
                             const GGCheckSpec& spec,
                             const RandomStream& stream,
                             const RunPolicy& policy = {},
                             bool pair_sides = true);

// ---------------------------------------------------------------------------
// Tilt / deletion invariance
// ---------------------------------------------------------------------------

struct InvarianceReport {
  MCEstimate baseline, transformed;
  double difference = 0.0;   // paired mean of per-sample differences
  double combined_se = 0.0;  // standard error of the paired difference
  double z = 0.0;
  TestVerdict verdict;
  std::uint64_t retries = 0;  // deletion retries over all replications
  std::string function_id;
  int n = 2;
  double t = std::numeric_limits<double>::quiet_NaN();
  int s = -1;
  std::string seed_path;
};

struct BatteryEntry {
  OverlapFunction f;
  int n = 2;
};

// Grid forms evaluate every cell on shared outer samples (common random
// numbers between the baseline and every transformed side).
std::vector<InvarianceReport> tilt_invariance_grid(
    const SamplerSpec& sampler, const std::vector<BatteryEntry>& battery,
    const std::vector<double>& ts, const CheckBudget& budget,
    const RandomStream& stream, const RunPolicy& policy = {});

std::vector<InvarianceReport> deletion_invariance_grid(
    const SamplerSpec& sampler, const std::vector<BatteryEntry>& battery,
    const std::vector<std::uint32_t>& ss, const CheckBudget& budget,
    const RandomStream& stream, const RunPolicy& policy = {},
    DeletionMode mode = DeletionMode::SingleShot);

InvarianceReport tilt_invariance_test(const SamplerSpec& sampler,
                                      const OverlapFunction& f, int n,
                                      double t, const CheckBudget& budget,
                                      const RandomStream& stream,
                                      const RunPolicy& policy = {});

InvarianceReport deletion_invariance_test(
    const SamplerSpec& sampler, const OverlapFunction& f, int n,
    std::uint32_t s, const CheckBudget& budget, const RandomStream& stream,
    const RunPolicy& policy = {}, DeletionMode mode = DeletionMode::SingleShot);

// ---------------------------------------------------------------------------
// Derivative-at-zero machinery
// ---------------------------------------------------------------------------

// Sum of the signs of the first n replicas minus n times the sign of replica
// n+1, with n = replica_slots.size() - 1. Lies in [-2n, 2n].
int sign_contrast(const SignVector& eps,
                  std::span<const std::uint32_t> replica_slots);

struct DerivativeEstimate {
  int k = 1;
  double estimate = 0.0;
  double se = 0.0;
  double bound = 0.0;  // 2^k n(n+1)...(n+k-1) times the function bound
  double max_abs_integrand = 0.0;
  std::uint64_t draws = 0;
  TestVerdict verdict;  // estimate consistent with zero
  std::string function_id;
  int n = 2;
  std::string seed_path;
};

// Monte Carlo estimate of the k-th derivative of t -> E<f>_t at t = 0,
// through the sign-contrast product representation. Every draw asserts the
// unconditional pointwise bound; a violation throws InternalCheckError.
DerivativeEstimate derivative_at_zero(const SamplerSpec& sampler,
                                      const OverlapFunction& f, int n, int k,
                                      const CheckBudget& budget,
                                      const RandomStream& stream,
                                      const RunPolicy& policy = {});

// ---------------------------------------------------------------------------
// Large-t limit: tilt vs deletion under the coupled retention
// ---------------------------------------------------------------------------

struct LimitReport {
  MCEstimate tilted, deleted;
  double max_gap = 0.0;      // over draws with retained mass >= mass_floor
  double max_gap_all = 0.0;  // over every non-degenerate draw
  double max_envelope = 0.0;
  double min_retained_mass = 1.0;
  double mass_floor = 1e-3;
  double gap_tolerance = 1e-6;
  std::uint64_t degenerate_skips = 0;
  bool envelope_ok = true;  // per-draw gap <= 2 n e^{-2t}/mass (+ fp slack)
  bool pass = false;
  double t = 20.0;
  std::string function_id;
  int n = 2;
  std::string seed_path;
};

// Compares <f> under the tilt at t with <f> under deletion driven by the
// coupled retention (eps+1)/2 on identical samples, with exact per-sample
// averaging. The consistency gate (max_gap <= gap_tolerance) is meaningful
// for large t (>= 10); smaller t values still produce the full report.
LimitReport limit_consistency(const SamplerSpec& sampler,
                              const OverlapFunction& f, int n, double t_large,
                              std::uint64_t m_samples,
                              const RandomStream& stream,
                              const RunPolicy& policy = {},
                              double mass_floor = 1e-3,
                              double gap_tolerance = 1e-6);

// ---------------------------------------------------------------------------
// Ordered-weights distributional comparison
// ---------------------------------------------------------------------------

struct OrderedWeightsCoordinate {
  std::string name;  // "w1".."wL", "r12", ...
  TestVerdict verdict;
};

struct OrderedWeightsReport {
  std::vector<OrderedWeightsCoordinate> coords;
  std::size_t L = 3;
  std::uint64_t M = 10000;
  double level = 0.01;
  double corrected_level = 0.0;  // Bonferroni over L + L(L-1)/2 coordinates
  std::uint64_t retries = 0;
  bool pass = true;
  std::string seed_path;
};

// Across M paired draws of (mu, deleted mu), compares the marginal laws of
// the top-L sorted weights and of the overlaps among the top-L atoms with
// per-coordinate two-sample KS tests at the Bonferroni-corrected level.
OrderedWeightsReport ordered_weights_comparison(
    const SamplerSpec& sampler, std::size_t L, std::uint64_t M,
    const RandomStream& stream, const RunPolicy& policy = {},
    std::uint32_t s = 1, double level = 0.01);

}  // namespace ggsim
