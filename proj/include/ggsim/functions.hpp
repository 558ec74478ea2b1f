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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ggsim/rng.hpp"

namespace ggsim {

// View of the replica overlap matrix handed to evaluators. Entries are
// addressed by replica index; when the engine has marginalized unused
// replicas, a remap table translates into the compact backing matrix.
class ReplicaOverlaps {
 public:
  ReplicaOverlaps(const double* data, int stride, const int* remap = nullptr)
      : data_(data), stride_(stride), remap_(remap) {}

  double at(int i, int j) const {
    if (remap_ != nullptr) {
      i = remap_[i];
      j = remap_[j];
    }
    return data_[i * stride_ + j];
  }

 private:
  const double* data_;
  int stride_;
  const int* remap_;
};

// A bounded function of the n-replica overlap matrix. `reads` declares every
// matrix entry the evaluator may touch; the averaging engine marginalizes
// replicas outside that set.
struct OverlapFunction {
  std::string id;
  int arity = 1;
  double bound = 1.0;  // |f| <= bound on overlap matrices with entries in [-1,1]
  std::vector<std::pair<int, int>> reads;
  std::function<double(const ReplicaOverlaps&)> eval;
};

// Registry ids: "one", "r12", "r12_sq", "r12_r13", "r12_ge" (threshold
// indicator I(R12 >= threshold)). The registry is closed so named
// experiments stay reproducible. Throws UsageError for unknown ids or an
// arity below what the function requires.
OverlapFunction make_function(const std::string& id, int arity,
                              double threshold = 0.5);

const std::vector<std::string>& function_registry();

// f multiplied by the overlap monomial R_{i,j}^p (replica indices 0-based).
// Extends the arity when j exceeds it.
OverlapFunction times_overlap_power(const OverlapFunction& f, int i, int j,
                                    int p);

// Randomized spot check of the declared contract: |f| <= bound on random
// admissible matrices, and the value ignores entries outside `reads`.
// Returns false (with a message) on the first violation.
bool spot_check_function(const OverlapFunction& f, int trials,
                         RandomStream& rng, std::string* message = nullptr);

}  // namespace ggsim
