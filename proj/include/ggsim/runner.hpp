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
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggsim/identity.hpp"

namespace ggsim {

inline constexpr const char* kVersion = "0.1.0";

// Experiment kinds the runner understands; also the CLI subcommand names.
const std::vector<std::string>& experiment_kinds();

// Flat key-value experiment description. Lists come from repeated keys or
// whitespace-separated values.
struct ExperimentConfig {
  std::string kind;

  // Sampler.
  std::string family = "rpc";  // pd | rpc | negative
  double zeta = 0.5;           // pd
  std::uint32_t K = 4096;      // pd atom count
  std::vector<double> zetas = {0.3, 0.6};  // rpc levels
  std::vector<double> qs = {0.3, 0.9};
  std::uint32_t branching = 64;
  std::vector<double> control_weights = {0.8, 0.2};
  std::vector<double> control_gram;  // row-major; identity when empty

  // Test battery.
  std::vector<std::string> functions = {"one", "r12", "r12_sq", "r12_ge",
                                        "r12_r13"};
  double threshold = 0.5;  // r12_ge cut
  std::vector<int> ns = {2, 3};
  std::vector<int> ps = {1, 2, 3};
  std::vector<double> ts = {0.25, 1.0, 3.0};
  std::vector<std::uint32_t> ss = {1, 2, 3};
  std::vector<int> ks = {1, 2, 3};  // derivative orders
  double t_large = 20.0;

  // Budgets.
  std::uint64_t m_outer = 2000;
  std::uint64_t m_inner = 1024;
  std::uint64_t m_samples = 10000;  // weights-dist / limit-check draws
  std::uint32_t L = 3;

  // Statistics and execution.
  std::uint64_t seed = 1;
  double level = kDefaultZLevel;
  double abs_floor = 0.01;
  double mass_floor = 1e-3;
  double gap_tolerance = 1e-6;
  int jobs = 0;  // 0 = hardware concurrency
  double time_limit_s = 600.0;
  std::string inner_mode = "auto";  // auto | exact | mc
};

// Parses the flat key-value format ('#' comments, repeated keys extend
// lists). Throws UsageError on unreadable files or malformed lines.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

// Collects every validation diagnostic (empty means runnable).
std::vector<std::string> validate_config(const ExperimentConfig& config);

struct CheckRecord {
  std::string check_id;
  std::string family;
  int n = -1;
  int p = -1;
  double t = std::numeric_limits<double>::quiet_NaN();
  int s = -1;
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  double diff = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double z = std::numeric_limits<double>::quiet_NaN();
  std::string verdict;  // pass | reject | timeout
  std::string seed_path;
  std::uint64_t retries = 0;
  nlohmann::ordered_json extra;  // per-kind details
};

struct ReportDocument {
  std::string version = kVersion;
  std::string kind;
  nlohmann::ordered_json config_echo;
  std::vector<CheckRecord> checks;
  bool suite_pass = true;
  double wall_clock_seconds = 0.0;

  nlohmann::ordered_json to_json() const;
  std::string records_csv() const;  // fixed-header flat table
  // 0 all pass, 1 at least one rejection/timeout.
  int exit_code() const { return suite_pass ? 0 : 1; }
};

// Canonical serialization for byte comparison: the wall-clock field is
// dropped, everything else is kept verbatim.
std::string canonical_report(const nlohmann::ordered_json& report);

// Executes the configured experiment. Throws UsageError for invalid configs
// (after reporting every diagnostic in the message), TimeLimitError when a
// check exceeds its limit, InternalCheckError for hard assertion failures.
ReportDocument run_experiment(const ExperimentConfig& config);

// Writes report.json and records.csv into the directory (created if absent).
void write_report(const ReportDocument& report, const std::string& out_dir);

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

}  // namespace ggsim
