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

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ggsim/errors.hpp"
#include "ggsim/runner.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> level;
  std::optional<int> jobs;
};

// CLI flags override the config; the environment overrides both.
void apply_overrides(ggsim::ExperimentConfig& config, const CliOptions& opts) {
  if (opts.seed) config.seed = *opts.seed;
  if (opts.level) config.level = *opts.level;
  if (opts.jobs) config.jobs = *opts.jobs;
  if (const char* env = std::getenv("GGSIM_SEED")) {
    config.seed = std::stoull(env);
  }
  if (const char* env = std::getenv("GGSIM_JOBS")) {
    config.jobs = std::stoi(env);
  }
}

ggsim::ExperimentConfig load_config(const std::string& kind,
                                    const CliOptions& opts) {
  ggsim::ExperimentConfig config;
  if (!opts.config_path.empty()) {
    config = ggsim::parse_config_file(opts.config_path);
  }
  if (config.kind.empty()) {
    config.kind = kind;
  } else if (!kind.empty() && config.kind != kind) {
    throw ggsim::UsageError("config kind '" + config.kind +
                            "' does not match subcommand '" + kind + "'");
  }
  apply_overrides(config, opts);
  return config;
}

int run_kind(const std::string& kind, const CliOptions& opts) {
  const ggsim::ExperimentConfig config = load_config(kind, opts);
  const auto diags = ggsim::validate_config(config);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "config error: " << d << '\n';
    return kExitUsage;
  }
  const ggsim::ReportDocument report = ggsim::run_experiment(config);
  ggsim::write_report(report, opts.out_dir);
  for (const auto& rec : report.checks) {
    std::cout << (rec.verdict == "pass" ? "[PASS] " : "[FAIL] ")
              << rec.check_id;
    if (!std::isnan(rec.diff)) std::cout << "  diff=" << rec.diff;
    if (!std::isnan(rec.z)) std::cout << "  z=" << rec.z;
    std::cout << '\n';
  }
  std::cout << "suite: " << (report.suite_pass ? "pass" : "FAIL") << "  ("
            << report.checks.size() << " checks, "
            << report.wall_clock_seconds << " s)\n";
  return report.exit_code();
}

int run_validate(const CliOptions& opts) {
  const ggsim::ExperimentConfig config = load_config("", opts);
  const auto diags = ggsim::validate_config(config);
  if (diags.empty()) {
    std::cout << "ok\n";
    return kExitPass;
  }
  for (const auto& d : diags) std::cout << "config error: " << d << '\n';
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ggsim: sampling and statistical verification of overlap "
               "identities for discrete random measures"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string chosen;
  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path,
                              "experiment config file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "root seed override");
    cmd->add_option("--level", opts.level, "significance level override");
    cmd->add_option("--jobs", opts.jobs, "worker thread count override");
  };
  for (const auto& kind : ggsim::experiment_kinds()) {
    auto* cmd = app.add_subcommand(kind, "run a " + kind + " experiment");
    add_common(cmd, false);
    cmd->callback([&chosen, kind]() { chosen = kind; });
  }
  auto* val = app.add_subcommand("validate",
                                 "check a config and report every problem");
  add_common(val, true);
  val->callback([&chosen]() { chosen = "validate"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (chosen == "validate") return run_validate(opts);
    return run_kind(chosen, opts);
  } catch (const ggsim::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ggsim::InternalCheckError& e) {
    std::cerr << "internal check failure: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}
