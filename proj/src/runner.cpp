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

#include "ggsim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ggsim/errors.hpp"

namespace ggsim {

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "gg-check",    "tilt-check", "delete-check",    "derivative-check",
      "limit-check", "weights-dist", "negative-control"};
  return kinds;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

struct RawConfig {
  std::map<std::string, std::vector<std::string>> values;
  std::vector<std::string> errors;
};

RawConfig tokenize(std::istream& in) {
  RawConfig raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto ws = line.find_first_not_of(" \t\r\n");
    if (ws == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raw.errors.push_back("line " + std::to_string(lineno) +
                           ": expected 'key = value'");
      continue;
    }
    std::istringstream key_in(line.substr(0, eq));
    std::string key;
    key_in >> key;
    std::string rest;
    if (key.empty() || (key_in >> rest)) {
      raw.errors.push_back("line " + std::to_string(lineno) +
                           ": malformed key");
      continue;
    }
    std::istringstream val_in(line.substr(eq + 1));
    std::string tok;
    auto& slot = raw.values[key];
    while (val_in >> tok) slot.push_back(tok);
    if (slot.empty()) {
      raw.errors.push_back("line " + std::to_string(lineno) + ": key '" + key +
                           "' has no value");
    }
  }
  return raw;
}

class Extractor {
 public:
  explicit Extractor(RawConfig raw) : raw_(std::move(raw)) {
    errors_ = raw_.errors;
  }

  bool has(const std::string& key) {
    return raw_.values.count(key) != 0;
  }

  std::string scalar(const std::string& key, std::string fallback) {
    touch(key);
    const auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    if (it->second.size() != 1) {
      errors_.push_back("key '" + key + "' expects a single value");
      return fallback;
    }
    return it->second[0];
  }

  double number(const std::string& key, double fallback) {
    const auto it = raw_.values.find(key);
    if (it == raw_.values.end()) {
      touch(key);
      return fallback;
    }
    return parse_double(key, scalar(key, ""), fallback);
  }

  std::uint64_t unsigned_number(const std::string& key,
                                std::uint64_t fallback) {
    const double v = number(key, static_cast<double>(fallback));
    if (v < 0.0 || v != std::floor(v)) {
      errors_.push_back("key '" + key + "' expects a nonnegative integer");
      return fallback;
    }
    return static_cast<std::uint64_t>(v);
  }

  std::vector<double> numbers(const std::string& key,
                              std::vector<double> fallback) {
    touch(key);
    const auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    std::vector<double> out;
    for (const auto& tok : it->second) {
      out.push_back(parse_double(key, tok, 0.0));
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key,
                                   std::vector<std::string> fallback) {
    touch(key);
    const auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    return it->second;
  }

  void finish() {
    for (const auto& [key, unused] : raw_.values) {
      if (!seen_.count(key)) {
        errors_.push_back("unknown key '" + key + "'");
      }
    }
  }

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  void touch(const std::string& key) { seen_.insert(key); }

  double parse_double(const std::string& key, const std::string& tok,
                      double fallback) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      errors_.push_back("key '" + key + "': cannot parse number '" + tok +
                        "'");
      return fallback;
    }
  }

  RawConfig raw_;
  std::set<std::string> seen_;
  std::vector<std::string> errors_;
};

template <typename T>
std::vector<T> to_int_list(const std::vector<double>& xs,
                           const std::string& key,
                           std::vector<std::string>& errors) {
  std::vector<T> out;
  for (double x : xs) {
    if (x != std::floor(x)) {
      errors.push_back("key '" + key + "' expects integers");
      continue;
    }
    out.push_back(static_cast<T>(x));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  Extractor ex(tokenize(in));
  ExperimentConfig c;
  std::vector<std::string> errors;

  c.kind = ex.scalar("kind", c.kind);
  c.family = ex.scalar("family", c.family);
  c.zeta = ex.number("zeta", c.zeta);
  c.K = static_cast<std::uint32_t>(ex.unsigned_number("K", c.K));
  c.zetas = ex.numbers("zetas", c.zetas);
  c.qs = ex.numbers("qs", c.qs);
  c.branching =
      static_cast<std::uint32_t>(ex.unsigned_number("branching", c.branching));
  c.control_weights = ex.numbers("control_weights", c.control_weights);
  c.control_gram = ex.numbers("control_gram", c.control_gram);
  c.functions = ex.strings("functions", c.functions);
  c.threshold = ex.number("threshold", c.threshold);
  c.ns = to_int_list<int>(ex.numbers("n", {2.0, 3.0}), "n", errors);
  c.ps = to_int_list<int>(ex.numbers("p", {1.0, 2.0, 3.0}), "p", errors);
  c.ts = ex.numbers("t", c.ts);
  c.ss = to_int_list<std::uint32_t>(ex.numbers("s", {1.0, 2.0, 3.0}), "s",
                                    errors);
  c.ks = to_int_list<int>(ex.numbers("k", {1.0, 2.0, 3.0}), "k", errors);
  c.t_large = ex.number("t_large", c.t_large);
  c.m_outer = ex.unsigned_number("M_outer", c.m_outer);
  c.m_inner = ex.unsigned_number("M_inner", c.m_inner);
  c.m_samples = ex.unsigned_number("M_samples", c.m_samples);
  c.L = static_cast<std::uint32_t>(ex.unsigned_number("L", c.L));
  c.seed = ex.unsigned_number("seed", c.seed);
  c.level = ex.number("level", c.level);
  c.abs_floor = ex.number("abs_floor", c.abs_floor);
  c.mass_floor = ex.number("mass_floor", c.mass_floor);
  c.gap_tolerance = ex.number("gap_tolerance", c.gap_tolerance);
  c.jobs = static_cast<int>(ex.unsigned_number("jobs", 0));
  c.time_limit_s = ex.number("time_limit", c.time_limit_s);
  c.inner_mode = ex.scalar("inner_mode", c.inner_mode);
  ex.finish();

  std::vector<std::string> all = ex.errors();
  all.insert(all.end(), errors.begin(), errors.end());
  if (!all.empty()) {
    std::string msg = "config errors:";
    for (const auto& e : all) msg += "\n  - " + e;
    throw UsageError(msg);
  }
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

SamplerSpec build_sampler(const ExperimentConfig& c) {
  if (c.family == "pd") return PDSampler{c.zeta, c.K};
  if (c.family == "rpc") {
    return CascadeSampler{CascadeParams{c.zetas, c.qs, c.branching}};
  }
  if (c.family == "negative") {
    std::vector<double> gram = c.control_gram;
    const std::size_t K = c.control_weights.size();
    if (gram.empty()) {
      gram.assign(K * K, 0.0);
      for (std::size_t i = 0; i < K; ++i) gram[i * K + i] = 1.0;
    }
    auto sample = std::make_shared<MeasureSample>(
        negative_control(c.control_weights, std::move(gram)));
    return PointMassSampler{std::move(sample)};
  }
  throw UsageError("unknown sampler family '" + c.family + "'");
}

InnerPolicy build_inner(const ExperimentConfig& c) {
  InnerPolicy inner;
  if (c.inner_mode == "auto") {
    inner.mode = InnerPolicy::Mode::Auto;
  } else if (c.inner_mode == "exact") {
    inner.mode = InnerPolicy::Mode::Exact;
  } else if (c.inner_mode == "mc") {
    inner.mode = InnerPolicy::Mode::MonteCarlo;
  } else {
    throw UsageError("inner_mode must be auto, exact or mc");
  }
  return inner;
}

RunPolicy build_policy(const ExperimentConfig& c) {
  RunPolicy policy;
  policy.level = c.level;
  policy.abs_floor = c.abs_floor;
  policy.inner = build_inner(c);
  policy.jobs = c.jobs;
  policy.time_limit_s = c.time_limit_s;
  return policy;
}

// (function, n) cells with the function instantiable at that replica count.
std::vector<BatteryEntry> expand_battery(const ExperimentConfig& c) {
  std::vector<BatteryEntry> battery;
  for (const auto& id : c.functions) {
    for (int n : c.ns) {
      if (n < 2) continue;
      try {
        battery.push_back({make_function(id, n, c.threshold), n});
      } catch (const UsageError&) {
        // function needs a larger arity than this n; covered by validation
      }
    }
  }
  return battery;
}

}  // namespace

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> diags;
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
    diags.push_back("unknown experiment kind '" + c.kind + "'");
  }
  try {
    build_sampler(c);
  } catch (const UsageError& e) {
    diags.push_back(std::string("sampler: ") + e.what());
  }
  for (const auto& id : c.functions) {
    const auto& reg = function_registry();
    if (std::find(reg.begin(), reg.end(), id) == reg.end()) {
      diags.push_back("unknown function id '" + id + "'");
      continue;
    }
    bool usable = false;
    for (int n : c.ns) {
      try {
        make_function(id, n, c.threshold);
        usable = usable || n >= 2;
      } catch (const UsageError&) {
      }
    }
    if (!usable) {
      diags.push_back("function '" + id +
                      "' is not instantiable at any configured n");
    }
  }
  for (int n : c.ns) {
    if (n < 2 && c.kind != "derivative-check") {
      diags.push_back(
          "n = " + std::to_string(n) +
          " is invalid: the identity family needs at least two replicas");
    }
    if (n < 1) diags.push_back("n must be >= 1");
  }
  for (int p : c.ps) {
    if (p < 1) diags.push_back("p must be a positive integer");
  }
  for (auto s : c.ss) {
    if (s < 1) diags.push_back("s must be >= 1");
  }
  for (int k : c.ks) {
    if (k < 1) diags.push_back("derivative order k must be >= 1");
  }
  for (double t : c.ts) {
    if (!std::isfinite(t)) diags.push_back("tilt t values must be finite");
  }
  if (!(c.threshold >= -1.0 && c.threshold <= 1.0)) {
    diags.push_back("threshold must lie within [-1,1]");
  }
  if (c.m_outer < 2) diags.push_back("M_outer must be >= 2");
  if (c.m_inner < 2) diags.push_back("M_inner must be >= 2");
  if (c.kind == "weights-dist" && c.m_samples < 1000) {
    diags.push_back("weights-dist needs M_samples >= 1000");
  }
  if (c.kind == "limit-check" && c.m_samples < 2) {
    diags.push_back("limit-check needs M_samples >= 2");
  }
  if (c.kind == "limit-check" && c.t_large < 10.0) {
    diags.push_back("limit-check consistency gate needs t_large >= 10");
  }
  if (c.L < 1) diags.push_back("L must be >= 1");
  if (!(c.level > 0.0 && c.level < 1.0)) {
    diags.push_back("level must lie strictly in (0,1)");
  }
  if (!(c.abs_floor >= 0.0)) diags.push_back("abs_floor must be >= 0");
  if (c.jobs < 0) diags.push_back("jobs must be >= 0");
  try {
    build_inner(c);
  } catch (const UsageError& e) {
    diags.push_back(e.what());
  }
  return diags;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string verdict_word(const TestVerdict& v) {
  return v.pass ? "pass" : "reject";
}

CheckRecord record_from_invariance(const std::string& kind_tag,
                                   const InvarianceReport& rep,
                                   const std::string& family) {
  CheckRecord rec;
  rec.check_id = kind_tag + ":f=" + rep.function_id +
                 ":n=" + std::to_string(rep.n);
  if (!std::isnan(rep.t)) rec.check_id += ":t=" + format_double(rep.t);
  if (rep.s >= 0) rec.check_id += ":s=" + std::to_string(rep.s);
  rec.family = family;
  rec.n = rep.n;
  rec.t = rep.t;
  rec.s = rep.s;
  rec.lhs = rep.baseline.mean;
  rec.rhs = rep.transformed.mean;
  rec.diff = rep.difference;
  rec.se = rep.combined_se;
  rec.z = rep.z;
  rec.verdict = verdict_word(rep.verdict);
  rec.seed_path = rep.seed_path;
  rec.retries = rep.retries;
  rec.extra = {{"baseline_se", rep.baseline.se},
               {"transformed_se", rep.transformed.se}};
  return rec;
}

void run_gg(const ExperimentConfig& c, const SamplerSpec& sampler,
            const RunPolicy& policy, const RandomStream& root,
            ReportDocument& doc) {
  std::uint32_t idx = 0;
  bool any = false;
  for (int n : c.ns) {
    if (n < 2) continue;
    for (int p : c.ps) {
      for (const auto& id : c.functions) {
        OverlapFunction f;
        try {
          f = make_function(id, n, c.threshold);
        } catch (const UsageError&) {
          continue;
        }
        any = true;
        GGCheckSpec spec{n, p, f, {c.m_outer, c.m_inner}};
        const GGResidualReport rep =
            gg_residual(sampler, spec, root.derive(idx++), policy);
        CheckRecord rec;
        rec.check_id = "gg:f=" + id + ":n=" + std::to_string(n) +
                       ":p=" + std::to_string(p);
        rec.family = c.family;
        rec.n = n;
        rec.p = p;
        rec.lhs = rep.lhs.mean;
        rec.rhs = rep.rhs.mean;
        rec.diff = rep.residual.mean;
        rec.se = rep.residual.se;
        rec.z = rep.verdict.statistic;
        rec.verdict = verdict_word(rep.verdict);
        rec.seed_path = rep.seed_path;
        rec.extra = {{"lhs_se", rep.lhs.se}, {"rhs_se", rep.rhs.se}};
        doc.checks.push_back(std::move(rec));
      }
    }
  }
  if (!any) throw UsageError("gg-check: no runnable (function, n) cells");
}

void run_tilt(const ExperimentConfig& c, const SamplerSpec& sampler,
              const RunPolicy& policy, const RandomStream& root,
              ReportDocument& doc) {
  const auto battery = expand_battery(c);
  if (battery.empty()) throw UsageError("tilt-check: empty battery");
  const auto reports = tilt_invariance_grid(
      sampler, battery, c.ts, {c.m_outer, c.m_inner}, root.derive(0), policy);
  for (const auto& rep : reports) {
    doc.checks.push_back(record_from_invariance("tilt", rep, c.family));
  }
}

void run_delete(const ExperimentConfig& c, const SamplerSpec& sampler,
                const RunPolicy& policy, const RandomStream& root,
                ReportDocument& doc) {
  const auto battery = expand_battery(c);
  if (battery.empty()) throw UsageError("delete-check: empty battery");
  const auto reports =
      deletion_invariance_grid(sampler, battery, c.ss, {c.m_outer, c.m_inner},
                               root.derive(0), policy);
  for (const auto& rep : reports) {
    doc.checks.push_back(record_from_invariance("delete", rep, c.family));
  }
}

void run_derivative(const ExperimentConfig& c, const SamplerSpec& sampler,
                    const RunPolicy& policy, const RandomStream& root,
                    ReportDocument& doc) {
  std::uint32_t idx = 0;
  bool any = false;
  for (const auto& entry : expand_battery(c)) {
    for (int k : c.ks) {
      any = true;
      const DerivativeEstimate est =
          derivative_at_zero(sampler, entry.f, entry.n, k,
                             {c.m_outer, c.m_inner}, root.derive(idx++),
                             policy);
      CheckRecord rec;
      rec.check_id = "derivative:f=" + entry.f.id +
                     ":n=" + std::to_string(entry.n) +
                     ":k=" + std::to_string(k);
      rec.family = c.family;
      rec.n = entry.n;
      rec.p = k;  // order recorded in the p column
      rec.lhs = est.estimate;
      rec.rhs = 0.0;
      rec.diff = est.estimate;
      rec.se = est.se;
      rec.z = est.verdict.statistic;
      rec.verdict = verdict_word(est.verdict);
      rec.seed_path = est.seed_path;
      rec.extra = {{"bound", est.bound},
                   {"max_abs_integrand", est.max_abs_integrand},
                   {"draws", est.draws}};
      doc.checks.push_back(std::move(rec));
    }
  }
  if (!any) throw UsageError("derivative-check: no runnable cells");
}

void run_limit(const ExperimentConfig& c, const SamplerSpec& sampler,
               const RunPolicy& policy, const RandomStream& root,
               ReportDocument& doc) {
  std::uint32_t idx = 0;
  const auto battery = expand_battery(c);
  if (battery.empty()) throw UsageError("limit-check: empty battery");
  for (const auto& entry : battery) {
    const LimitReport rep = limit_consistency(
        sampler, entry.f, entry.n, c.t_large, c.m_samples, root.derive(idx++),
        policy, c.mass_floor, c.gap_tolerance);
    CheckRecord rec;
    rec.check_id = "limit:f=" + entry.f.id + ":n=" + std::to_string(entry.n) +
                   ":t=" + format_double(c.t_large);
    rec.family = c.family;
    rec.n = entry.n;
    rec.t = rep.t;
    rec.lhs = rep.tilted.mean;
    rec.rhs = rep.deleted.mean;
    rec.diff = rep.max_gap;
    rec.verdict = rep.pass ? "pass" : "reject";
    rec.seed_path = rep.seed_path;
    rec.extra = {{"max_gap_all", rep.max_gap_all},
                 {"max_envelope", rep.max_envelope},
                 {"min_retained_mass", rep.min_retained_mass},
                 {"degenerate_skips", rep.degenerate_skips},
                 {"envelope_ok", rep.envelope_ok},
                 {"gap_tolerance", rep.gap_tolerance},
                 {"mass_floor", rep.mass_floor}};
    doc.checks.push_back(std::move(rec));
  }
}

void run_weights_dist(const ExperimentConfig& c, const SamplerSpec& sampler,
                      const RunPolicy& policy, const RandomStream& root,
                      ReportDocument& doc) {
  const std::uint32_t s = c.ss.empty() ? 1 : c.ss.front();
  const OrderedWeightsReport rep = ordered_weights_comparison(
      sampler, c.L, c.m_samples, root.derive(0), policy, s, c.level);
  for (const auto& coord : rep.coords) {
    CheckRecord rec;
    rec.check_id = "weights-dist:" + coord.name;
    rec.family = c.family;
    rec.s = static_cast<int>(s);
    rec.lhs = coord.verdict.statistic;
    rec.rhs = coord.verdict.threshold;
    rec.diff = coord.verdict.statistic - coord.verdict.threshold;
    rec.verdict = coord.verdict.pass ? "pass" : "reject";
    rec.seed_path = rep.seed_path;
    rec.retries = rep.retries;
    rec.extra = {{"corrected_level", rep.corrected_level},
                 {"L", rep.L},
                 {"M", rep.M}};
    doc.checks.push_back(std::move(rec));
  }
}

void run_negative_control(const ExperimentConfig& c,
                          const SamplerSpec& sampler, const RunPolicy& policy,
                          const RandomStream& root, ReportDocument& doc) {
  // Canned power demonstration: the deletion test and the GG residual on the
  // deterministic control measure; both are expected to reject.
  const OverlapFunction f = make_function("r12", 2, c.threshold);
  const InvarianceReport del = deletion_invariance_test(
      sampler, f, 2, 1, {c.m_outer, c.m_inner}, root.derive(0), policy);
  doc.checks.push_back(record_from_invariance("delete", del, c.family));
  GGCheckSpec spec{2, 1, f, {c.m_outer, c.m_inner}};
  const GGResidualReport gg =
      gg_residual(sampler, spec, root.derive(1), policy);
  CheckRecord rec;
  rec.check_id = "gg:f=r12:n=2:p=1";
  rec.family = c.family;
  rec.n = 2;
  rec.p = 1;
  rec.lhs = gg.lhs.mean;
  rec.rhs = gg.rhs.mean;
  rec.diff = gg.residual.mean;
  rec.se = gg.residual.se;
  rec.z = gg.verdict.statistic;
  rec.verdict = verdict_word(gg.verdict);
  rec.seed_path = gg.seed_path;
  doc.checks.push_back(std::move(rec));
}

}  // namespace

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  // Execution knobs (jobs, time_limit) are deliberately excluded: they must
  // not change results, so they are not part of the experiment identity.
  nlohmann::ordered_json j;
  j["kind"] = c.kind;
  j["family"] = c.family;
  if (c.family == "pd") {
    j["zeta"] = c.zeta;
    j["K"] = c.K;
  } else if (c.family == "rpc") {
    j["zetas"] = c.zetas;
    j["qs"] = c.qs;
    j["branching"] = c.branching;
  } else {
    j["control_weights"] = c.control_weights;
    if (!c.control_gram.empty()) j["control_gram"] = c.control_gram;
  }
  j["functions"] = c.functions;
  j["threshold"] = c.threshold;
  j["n"] = c.ns;
  j["p"] = c.ps;
  j["t"] = c.ts;
  j["s"] = c.ss;
  j["k"] = c.ks;
  j["t_large"] = c.t_large;
  j["M_outer"] = c.m_outer;
  j["M_inner"] = c.m_inner;
  j["M_samples"] = c.m_samples;
  j["L"] = c.L;
  j["seed"] = c.seed;
  j["level"] = c.level;
  j["abs_floor"] = c.abs_floor;
  j["mass_floor"] = c.mass_floor;
  j["gap_tolerance"] = c.gap_tolerance;
  j["inner_mode"] = c.inner_mode;
  return j;
}

ReportDocument run_experiment(const ExperimentConfig& config) {
  const auto diags = validate_config(config);
  if (!diags.empty()) {
    std::string msg = "invalid config:";
    for (const auto& d : diags) msg += "\n  - " + d;
    throw UsageError(msg);
  }
  const auto started = std::chrono::steady_clock::now();
  ReportDocument doc;
  doc.kind = config.kind;
  doc.config_echo = config_to_json(config);

  const SamplerSpec sampler = build_sampler(config);
  const RunPolicy policy = build_policy(config);
  const RandomStream root(config.seed);

  try {
    if (config.kind == "gg-check") {
      run_gg(config, sampler, policy, root, doc);
    } else if (config.kind == "tilt-check") {
      run_tilt(config, sampler, policy, root, doc);
    } else if (config.kind == "delete-check") {
      run_delete(config, sampler, policy, root, doc);
    } else if (config.kind == "derivative-check") {
      run_derivative(config, sampler, policy, root, doc);
    } else if (config.kind == "limit-check") {
      run_limit(config, sampler, policy, root, doc);
    } else if (config.kind == "weights-dist") {
      run_weights_dist(config, sampler, policy, root, doc);
    } else if (config.kind == "negative-control") {
      run_negative_control(config, sampler, policy, root, doc);
    } else {
      throw UsageError("unknown experiment kind '" + config.kind + "'");
    }
  } catch (const TimeLimitError& e) {
    CheckRecord rec;
    rec.check_id = config.kind + ":timeout";
    rec.family = config.family;
    rec.verdict = "timeout";
    rec.extra = {{"diagnostic", e.what()}};
    doc.checks.push_back(std::move(rec));
  }

  doc.suite_pass = true;
  for (const auto& rec : doc.checks) {
    doc.suite_pass = doc.suite_pass && rec.verdict == "pass";
  }
  doc.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return doc;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::ordered_json ReportDocument::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["kind"] = kind;
  j["config"] = config_echo;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& rec : checks) {
    nlohmann::ordered_json r;
    r["check_id"] = rec.check_id;
    r["family"] = rec.family;
    r["n"] = rec.n >= 0 ? nlohmann::ordered_json(rec.n)
                        : nlohmann::ordered_json(nullptr);
    r["p"] = rec.p >= 0 ? nlohmann::ordered_json(rec.p)
                        : nlohmann::ordered_json(nullptr);
    r["t"] = json_number(rec.t);
    r["s"] = rec.s >= 0 ? nlohmann::ordered_json(rec.s)
                        : nlohmann::ordered_json(nullptr);
    r["lhs"] = json_number(rec.lhs);
    r["rhs"] = json_number(rec.rhs);
    r["diff"] = json_number(rec.diff);
    r["se"] = json_number(rec.se);
    r["z"] = json_number(rec.z);
    r["verdict"] = rec.verdict;
    r["seed_path"] = rec.seed_path;
    r["retries"] = rec.retries;
    if (!rec.extra.is_null()) r["extra"] = rec.extra;
    arr.push_back(std::move(r));
  }
  j["checks"] = std::move(arr);
  j["suite_verdict"] = suite_pass ? "pass" : "fail";
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

std::string ReportDocument::records_csv() const {
  std::string out =
      "check_id,family,n,p,t,s,lhs,rhs,diff,se,z,verdict,seed_path\n";
  auto cell_int = [](int v) {
    return v >= 0 ? std::to_string(v) : std::string();
  };
  for (const auto& rec : checks) {
    out += rec.check_id + ',' + rec.family + ',' + cell_int(rec.n) + ',' +
           cell_int(rec.p) + ',' + format_double(rec.t) + ',' +
           cell_int(rec.s) + ',' + format_double(rec.lhs) + ',' +
           format_double(rec.rhs) + ',' + format_double(rec.diff) + ',' +
           format_double(rec.se) + ',' + format_double(rec.z) + ',' +
           rec.verdict + ',' + rec.seed_path + '\n';
  }
  return out;
}

std::string canonical_report(const nlohmann::ordered_json& report) {
  nlohmann::ordered_json j = report;
  j.erase("wall_clock_seconds");
  return j.dump(2);
}

void write_report(const ReportDocument& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(std::filesystem::path(out_dir) / "report.json");
    if (!out) throw UsageError("cannot write report.json in '" + out_dir + "'");
    out << report.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(std::filesystem::path(out_dir) / "records.csv");
    if (!out) throw UsageError("cannot write records.csv in '" + out_dir + "'");
    out << report.records_csv();
  }
}

}  // namespace ggsim
