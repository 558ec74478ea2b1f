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

#include "ggsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ggsim/errors.hpp"

namespace ggsim {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Acklam's inverse normal approximation, |relative error| < 1.15e-9.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw UsageError("normal_quantile: p must lie strictly in (0,1)");
  }
  double x = acklam(p);
  // One Halley step against erfc brings the result near machine precision.
  const double e = normal_cdf(x) - p;
  const double u =
      e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

TestVerdict z_equality_test(const MCEstimate& a, const MCEstimate& b,
                            double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw UsageError("z_equality_test: level must lie strictly in (0,1)");
  }
  TestVerdict v;
  v.level = level;
  v.threshold = normal_quantile(1.0 - level / 2.0);
  v.n1 = a.m_outer;
  v.n2 = b.m_outer;
  const double combined = std::sqrt(a.se * a.se + b.se * b.se);
  const double diff = a.mean - b.mean;
  if (combined == 0.0) {
    if (diff == 0.0) {
      v.statistic = 0.0;
      v.pass = true;
    } else {
      v.statistic = std::numeric_limits<double>::infinity();
      v.infinite_statistic = true;
      v.pass = false;
    }
    return v;
  }
  v.statistic = diff / combined;
  v.pass = std::abs(v.statistic) <= v.threshold;
  return v;
}

double ks_statistic(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    const double fa = static_cast<double>(i) / na;
    const double fb = static_cast<double>(j) / nb;
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

TestVerdict ks_two_sample(std::span<const double> xs,
                          std::span<const double> ys, double level) {
  if (xs.size() < 50 || ys.size() < 50) {
    throw UsageError("ks_two_sample: both samples need at least 50 points");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw UsageError("ks_two_sample: level must lie strictly in (0,1)");
  }
  TestVerdict v;
  v.level = level;
  v.n1 = xs.size();
  v.n2 = ys.size();
  const double n1 = static_cast<double>(xs.size());
  const double n2 = static_cast<double>(ys.size());
  v.statistic = ks_statistic(xs, ys);
  v.threshold =
      std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((n1 + n2) / (n1 * n2));
  v.pass = v.statistic <= v.threshold;
  return v;
}

}  // namespace ggsim
