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

namespace ggsim {

// Monte Carlo estimate of a quenched average, with provenance.
struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t m_inner = 1;
  std::uint64_t m_outer = 1;
  std::uint64_t seed = 0;
};

struct TestVerdict {
  double statistic = 0.0;
  double threshold = 0.0;
  double level = 0.0;
  bool pass = true;
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  // Set when both standard errors vanish but the means differ; the statistic
  // is then +inf and the verdict is reject.
  bool infinite_statistic = false;
};

double normal_cdf(double x);
// Inverse standard normal CDF (Acklam's rational approximation plus one
// Halley refinement; accurate to ~1e-15 over (0,1)).
double normal_quantile(double p);

// Default level chosen so the two-sided z threshold is exactly 3.
inline constexpr double kDefaultZLevel = 0.0026997960632601866;

// Two-sided z test of mean equality between two independent estimates.
// Boundary |z| == threshold passes.
TestVerdict z_equality_test(const MCEstimate& a, const MCEstimate& b,
                            double level = kDefaultZLevel);

// Two-sided two-sample Kolmogorov-Smirnov test with the asymptotic
// threshold c(level) * sqrt((n1+n2)/(n1*n2)). Requires both samples to have
// at least 50 points. Ties are handled by comparing the empirical CDFs after
// consuming every tied value.
TestVerdict ks_two_sample(std::span<const double> xs,
                          std::span<const double> ys,
                          double level = 0.01);

double ks_statistic(std::span<const double> xs, std::span<const double> ys);

}  // namespace ggsim
