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

#include <memory>
#include <optional>
#include <variant>

#include "ggsim/functions.hpp"
#include "ggsim/measure.hpp"
#include "ggsim/rng.hpp"
#include "ggsim/stats.hpp"

namespace ggsim {

// How nested replica averages inside quenched estimators are evaluated.
struct InnerPolicy {
  enum class Mode { Auto, Exact, MonteCarlo };
  Mode mode = Mode::Auto;
  // Hard cap on exact enumeration (gibbs_exact precondition).
  std::uint64_t enumeration_budget = 100'000'000;
  // In Auto mode, prefer enumeration only below this many evaluations.
  std::uint64_t auto_enumeration_budget = 1'000'000;
};

// Replica average <f> by full enumeration over atom tuples (with
// replacement), compensated summation. Replicas the function provably does
// not read are marginalized first; hierarchical overlap models with at most
// three effective replicas are evaluated through closed-form ancestor-depth
// sums. Throws BudgetExceededError when enumeration would exceed the budget;
// use gibbs_mc then.
double gibbs_exact(const MeasureSample& sample, const OverlapFunction& f,
                   std::uint64_t enumeration_budget = 100'000'000);

// Monte Carlo estimate of <f> from M independent replica tuples drawn from
// the weights. Unbiased; se is the sample standard error. Requires M >= 2.
MCEstimate gibbs_mc(const MeasureSample& sample, const OverlapFunction& f,
                    std::uint64_t M, RandomStream& rng);

namespace detail {
struct TreeTables;
}

// Per-sample averaging facade that caches the tree depth tables / the
// sampling CDF so a battery of functions can be evaluated on one sample
// cheaply. Thread-confined.
class GibbsAverager {
 public:
  explicit GibbsAverager(const MeasureSample& sample,
                         InnerPolicy policy = InnerPolicy{});

  // Evaluates <f>. Uses the exact route when the policy permits, otherwise
  // Monte Carlo with m_inner draws from `rng`. Sets *exact to whether the
  // returned value is exact.
  double average(const OverlapFunction& f, std::uint64_t m_inner,
                 RandomStream rng, bool* exact = nullptr);

  // Exact value or std::nullopt when the policy's budget forbids it.
  std::optional<double> exact_average(const OverlapFunction& f);

  const MeasureSample& sample() const { return sample_; }

 private:
  const detail::TreeTables& tables();
  const std::vector<double>& cdf();

  const MeasureSample& sample_;
  InnerPolicy policy_;
  std::shared_ptr<detail::TreeTables> tables_;
  std::vector<double> cdf_;
};

// Measure samplers for quenched averages.
struct PDSampler {
  double zeta = 0.5;
  std::uint32_t K = 4096;
};
struct CascadeSampler {
  CascadeParams params;
};
// Deterministic law: every draw returns the same sample.
struct PointMassSampler {
  std::shared_ptr<const MeasureSample> sample;
};
using SamplerSpec = std::variant<PDSampler, CascadeSampler, PointMassSampler>;

MeasureSample draw_sample(const SamplerSpec& spec, RandomStream& rng);
std::string sampler_family(const SamplerSpec& spec);
void validate_sampler(const SamplerSpec& spec);  // throws UsageError

// Quenched average E<f>: mean over m_outer fresh measure samples of the
// inner replica average (exact when the policy permits, Monte Carlo with
// m_inner draws otherwise). The standard error is computed across outer
// replications only. Outer replications run on derived child streams in
// parallel when jobs > 1; the reduction is order-fixed, so results are
// independent of the thread count.
MCEstimate quenched_average(const SamplerSpec& sampler,
                            const OverlapFunction& f, std::uint64_t m_outer,
                            std::uint64_t m_inner, const RandomStream& stream,
                            InnerPolicy policy = InnerPolicy{}, int jobs = 1);

}  // namespace ggsim
