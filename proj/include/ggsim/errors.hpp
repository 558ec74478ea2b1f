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

#include <stdexcept>
#include <string>

namespace ggsim {

// Caller misuse: bad parameters, malformed configs, invariant-violating
// inputs. Maps to CLI exit code 2.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Every retained weight was deleted; the renormalizing denominator is zero.
class DegenerateDeletionError : public std::runtime_error {
 public:
  explicit DegenerateDeletionError(const std::string& what)
      : std::runtime_error(what) {}
};

// Exact enumeration would exceed the evaluation budget.
class BudgetExceededError : public std::runtime_error {
 public:
  explicit BudgetExceededError(const std::string& what)
      : std::runtime_error(what) {}
};

// An unconditional internal invariant failed (e.g. the pointwise derivative
// bound). Indicates an implementation bug. Maps to CLI exit code 3.
class InternalCheckError : public std::logic_error {
 public:
  explicit InternalCheckError(const std::string& what)
      : std::logic_error(what) {}
};

// A check exceeded its configured wall-clock limit.
class TimeLimitError : public std::runtime_error {
 public:
  explicit TimeLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace ggsim
