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

#include "ggsim/functions.hpp"

#include <algorithm>
#include <cmath>

#include "ggsim/errors.hpp"

namespace ggsim {

namespace {

double int_pow(double x, int p) {
  double out = 1.0;
  for (int i = 0; i < p; ++i) out *= x;
  return out;
}

void require_arity(const std::string& id, int arity, int needed) {
  if (arity < needed) {
    throw UsageError("function '" + id + "' requires arity >= " +
                     std::to_string(needed));
  }
}

}  // namespace

const std::vector<std::string>& function_registry() {
  static const std::vector<std::string> ids = {"one", "r12", "r12_sq",
                                               "r12_r13", "r12_ge"};
  return ids;
}

OverlapFunction make_function(const std::string& id, int arity,
                              double threshold) {
  if (arity < 1) throw UsageError("function arity must be >= 1");
  OverlapFunction f;
  f.id = id;
  f.arity = arity;
  f.bound = 1.0;
  if (id == "one") {
    f.eval = [](const ReplicaOverlaps&) { return 1.0; };
    return f;
  }
  if (id == "r12") {
    require_arity(id, arity, 2);
    f.reads = {{0, 1}};
    f.eval = [](const ReplicaOverlaps& o) { return o.at(0, 1); };
    return f;
  }
  if (id == "r12_sq") {
    require_arity(id, arity, 2);
    f.reads = {{0, 1}};
    f.eval = [](const ReplicaOverlaps& o) {
      const double r = o.at(0, 1);
      return r * r;
    };
    return f;
  }
  if (id == "r12_r13") {
    require_arity(id, arity, 3);
    f.reads = {{0, 1}, {0, 2}};
    f.eval = [](const ReplicaOverlaps& o) { return o.at(0, 1) * o.at(0, 2); };
    return f;
  }
  if (id == "r12_ge") {
    require_arity(id, arity, 2);
    if (!(threshold >= -1.0 && threshold <= 1.0)) {
      throw UsageError("r12_ge threshold must lie within [-1,1]");
    }
    f.id = "r12_ge";
    f.reads = {{0, 1}};
    f.eval = [threshold](const ReplicaOverlaps& o) {
      return o.at(0, 1) >= threshold ? 1.0 : 0.0;
    };
    return f;
  }
  throw UsageError("unknown function id '" + id + "'");
}

OverlapFunction times_overlap_power(const OverlapFunction& f, int i, int j,
                                    int p) {
  if (p < 1) throw UsageError("overlap power must be >= 1");
  if (i < 0 || j < 0 || i == j) {
    throw UsageError("overlap monomial needs two distinct replica indices");
  }
  OverlapFunction g;
  g.id = f.id + "*R(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
         ")^" + std::to_string(p);
  g.arity = std::max({f.arity, i + 1, j + 1});
  g.bound = f.bound;  // |R|^p <= 1 on admissible matrices
  g.reads = f.reads;
  auto entry = std::minmax(i, j);
  if (std::find(g.reads.begin(), g.reads.end(),
                std::make_pair(entry.first, entry.second)) == g.reads.end()) {
    g.reads.emplace_back(entry.first, entry.second);
  }
  g.eval = [inner = f.eval, i, j, p](const ReplicaOverlaps& o) {
    return inner(o) * int_pow(o.at(i, j), p);
  };
  return g;
}

bool spot_check_function(const OverlapFunction& f, int trials,
                         RandomStream& rng, std::string* message) {
  const int n = f.arity;
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int trial = 0; trial < trials; ++trial) {
    for (int i = 0; i < n; ++i) {
      m[i * n + i] = rng.uniform01();
      for (int j = i + 1; j < n; ++j) {
        const double v = 2.0 * rng.uniform01() - 1.0;
        m[i * n + j] = v;
        m[j * n + i] = v;
      }
    }
    const double value = f.eval(ReplicaOverlaps(m.data(), n));
    if (!(std::abs(value) <= f.bound + 1e-12)) {
      if (message != nullptr) {
        *message = "bound violated: |" + std::to_string(value) + "| > " +
                   std::to_string(f.bound);
      }
      return false;
    }
    // Perturb entries outside the declared read set; the value must not move.
    auto declared = [&](int i, int j) {
      for (auto [a, b] : f.reads) {
        if ((a == i && b == j) || (a == j && b == i)) return true;
      }
      return false;
    };
    std::vector<double> m2 = m;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (!declared(i, j)) m2[i * n + j] = 2.0 * rng.uniform01() - 1.0;
      }
    }
    const double value2 = f.eval(ReplicaOverlaps(m2.data(), n));
    if (value2 != value) {
      if (message != nullptr) {
        *message = "evaluator reads entries outside its declared set";
      }
      return false;
    }
  }
  return true;
}

}  // namespace ggsim
