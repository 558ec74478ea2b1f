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
#include <cstddef>
#include <span>
#include <vector>

namespace ggsim {

// Kahan-Babuska-Neumaier compensated accumulator. Accumulation error stays
// O(eps) independent of the number of terms.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }
  void reset() { sum_ = comp_ = 0.0; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

// Mean through the first element plus the compensated mean of deviations.
// Returns the common value bitwise when all inputs are equal.
inline double shifted_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double anchor = xs[0];
  NeumaierSum dev;
  for (double x : xs) dev.add(x - anchor);
  return anchor + dev.value() / static_cast<double>(xs.size());
}

// Sample mean and standard error of the mean (sd/sqrt(n)); se is 0 for n < 2.
struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSE mean_se(std::span<const double> xs) {
  MeanSE out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  out.mean = shifted_mean(xs);
  if (n < 2) return out;
  NeumaierSum sq;
  for (double x : xs) {
    const double d = x - out.mean;
    sq.add(d * d);
  }
  const double var = sq.value() / static_cast<double>(n - 1);
  out.se = std::sqrt(var > 0.0 ? var / static_cast<double>(n) : 0.0);
  return out;
}

// Sample covariance matrix (row-major, dim x dim) of per-row observation
// vectors, two-pass and compensated so the result is independent of thread
// scheduling when rows are filled by index.
inline std::vector<double> covariance_matrix(
    const std::vector<std::vector<double>>& rows, std::size_t dim) {
  std::vector<double> means(dim, 0.0);
  const std::size_t n = rows.size();
  std::vector<double> cov(dim * dim, 0.0);
  if (n < 2) return cov;
  for (std::size_t j = 0; j < dim; ++j) {
    NeumaierSum s;
    for (const auto& r : rows) s.add(r[j]);
    means[j] = s.value() / static_cast<double>(n);
  }
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a; b < dim; ++b) {
      NeumaierSum s;
      for (const auto& r : rows) s.add((r[a] - means[a]) * (r[b] - means[b]));
      const double c = s.value() / static_cast<double>(n - 1);
      cov[a * dim + b] = c;
      cov[b * dim + a] = c;
    }
  }
  return cov;
}

}  // namespace ggsim
