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

#include "ggsim/identity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ggsim/errors.hpp"
#include "ggsim/numeric.hpp"
#include "ggsim/parallel.hpp"

namespace ggsim {

namespace {

using Clock = std::chrono::steady_clock;

Clock::time_point deadline_from(const RunPolicy& policy) {
  if (policy.time_limit_s <= 0.0) return Clock::time_point::max();
  return Clock::now() +
         std::chrono::duration_cast<Clock::duration>(
             std::chrono::duration<double>(policy.time_limit_s));
}

void check_deadline(const Clock::time_point& deadline, const char* what) {
  if (Clock::now() > deadline) {
    throw TimeLimitError(std::string(what) + ": time limit exceeded");
  }
}

std::vector<double> column(const std::vector<std::vector<double>>& rows,
                           std::size_t j) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

MCEstimate column_estimate(const std::vector<std::vector<double>>& rows,
                           std::size_t j, std::uint64_t m_inner,
                           std::uint64_t seed) {
  const auto xs = column(rows, j);
  const MeanSE agg = mean_se(xs);
  MCEstimate est;
  est.mean = agg.mean;
  est.se = agg.se;
  est.m_outer = rows.size();
  est.m_inner = m_inner;
  est.seed = seed;
  return est;
}

}  // namespace

TestVerdict equality_verdict(double difference, double se,
                             const RunPolicy& policy) {
  TestVerdict v;
  v.level = policy.level;
  v.threshold = normal_quantile(1.0 - policy.level / 2.0);
  const bool floor_ok = std::abs(difference) <= policy.abs_floor;
  if (se == 0.0) {
    if (difference == 0.0) {
      v.statistic = 0.0;
      v.pass = true;
    } else {
      v.statistic = std::numeric_limits<double>::infinity();
      v.infinite_statistic = true;
      v.pass = floor_ok;
    }
    return v;
  }
  v.statistic = difference / se;
  v.pass = std::abs(v.statistic) <= v.threshold || floor_ok;
  return v;
}

// ---------------------------------------------------------------------------
// GG residual
// ---------------------------------------------------------------------------

GGResidualReport gg_residual(const SamplerSpec& sampler,
                             const GGCheckSpec& spec,
                             const RandomStream& stream,
                             const RunPolicy& policy, bool pair_sides) {
  if (spec.n < 2) throw UsageError("gg_residual: n must be >= 2");
  if (spec.p < 1) throw UsageError("gg_residual: p must be >= 1");
  if (spec.f.arity > spec.n) {
    throw UsageError("gg_residual: test function arity exceeds n");
  }
  if (spec.budget.m_outer < 2) {
    throw UsageError("gg_residual: m_outer must be >= 2");
  }
  validate_sampler(sampler);

  // Term layout per replication: [lhs, <f>, <R12^p>, <f R_{1,l}^p> l=2..n].
  const int n = spec.n;
  const std::size_t dim = 3 + static_cast<std::size_t>(n - 1);
  std::vector<OverlapFunction> terms;
  terms.reserve(dim);
  terms.push_back(times_overlap_power(spec.f, 0, n, spec.p));
  terms.push_back(spec.f);
  terms.push_back(times_overlap_power(make_function("one", 2), 0, 1, spec.p));
  for (int l = 2; l <= n; ++l) {
    terms.push_back(times_overlap_power(spec.f, 0, l - 1, spec.p));
  }

  const auto deadline = deadline_from(policy);
  std::vector<std::vector<double>> rows(spec.budget.m_outer);
  parallel_for(policy.jobs, spec.budget.m_outer, [&](std::uint64_t rep) {
    check_deadline(deadline, "gg_residual");
    RandomStream rep_stream = stream.derive(static_cast<std::uint32_t>(rep));
    RandomStream sampler_rng = rep_stream.derive(0);
    const MeasureSample lhs_sample = draw_sample(sampler, sampler_rng);
    GibbsAverager lhs_av(lhs_sample, policy.inner);

    // Unpaired mode draws an independent sample for the right-hand terms;
    // paired mode reuses the same one (common random numbers).
    RandomStream rhs_rng = rep_stream.derive(4);
    const MeasureSample rhs_sample =
        pair_sides ? lhs_sample : draw_sample(sampler, rhs_rng);
    GibbsAverager rhs_av(rhs_sample, policy.inner);

    std::vector<double>& row = rows[rep];
    row.resize(dim);
    for (std::size_t term = 0; term < dim; ++term) {
      GibbsAverager& av = (term == 0 || pair_sides) ? lhs_av : rhs_av;
      row[term] = av.average(terms[term], spec.budget.m_inner,
                             rep_stream.derive(10 + static_cast<std::uint32_t>(
                                                        term)));
    }
  });

  // Column means; the rhs is the plain average of its n constituent terms so
  // bitwise-identical terms (constant f) cancel the lhs exactly.
  std::vector<double> col_means(dim);
  for (std::size_t j = 0; j < dim; ++j) col_means[j] = shifted_mean(column(rows, j));
  const double a_mean = col_means[0];
  const double b_mean = col_means[1];
  const double c_mean = col_means[2];
  std::vector<double> rhs_terms;
  rhs_terms.push_back(b_mean * c_mean);
  for (std::size_t j = 3; j < dim; ++j) rhs_terms.push_back(col_means[j]);
  const double rhs_mean = shifted_mean(rhs_terms);
  const double residual_mean = a_mean - rhs_mean;

  // Delta-method standard errors from the per-replication covariance.
  const auto cov = covariance_matrix(rows, dim);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> g_res(dim, 0.0), g_rhs(dim, 0.0);
  g_res[0] = 1.0;
  g_res[1] = -c_mean * inv_n;
  g_res[2] = -b_mean * inv_n;
  g_rhs[1] = c_mean * inv_n;
  g_rhs[2] = b_mean * inv_n;
  for (std::size_t j = 3; j < dim; ++j) {
    g_res[j] = -inv_n;
    g_rhs[j] = inv_n;
  }
  auto quad = [&](const std::vector<double>& g) {
    NeumaierSum s;
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) {
        s.add(g[a] * g[b] * cov[a * dim + b]);
      }
    }
    const double v = s.value();
    return v > 0.0 ? std::sqrt(v / static_cast<double>(rows.size())) : 0.0;
  };

  GGResidualReport report;
  report.function_id = spec.f.id;
  report.n = n;
  report.p = spec.p;
  report.seed_path = stream.path_string();
  report.lhs = column_estimate(rows, 0, spec.budget.m_inner,
                               stream.root_seed());
  report.rhs = report.lhs;
  report.rhs.mean = rhs_mean;
  report.rhs.se = quad(g_rhs);
  report.residual = report.lhs;
  report.residual.mean = residual_mean;
  report.residual.se = quad(g_res);
  report.verdict = equality_verdict(residual_mean, report.residual.se, policy);
  return report;
}

// ---------------------------------------------------------------------------
// Invariance grids
// ---------------------------------------------------------------------------

namespace {

void validate_battery(const std::vector<BatteryEntry>& battery) {
  if (battery.empty()) throw UsageError("invariance grid: empty battery");
  for (const auto& e : battery) {
    if (e.n < 2) throw UsageError("invariance test: n must be >= 2");
    if (e.f.arity > e.n) {
      throw UsageError("invariance test: function arity exceeds n");
    }
    if (e.f.bound > 1.0 + 1e-12) {
      throw UsageError("invariance test: requires |f| <= 1");
    }
  }
}

InvarianceReport aggregate_pair(const std::vector<std::vector<double>>& rows,
                                std::size_t base_col, std::size_t trans_col,
                                std::uint64_t m_inner, const RunPolicy& policy,
                                const RandomStream& stream) {
  InvarianceReport rep;
  rep.baseline = column_estimate(rows, base_col, m_inner, stream.root_seed());
  rep.transformed =
      column_estimate(rows, trans_col, m_inner, stream.root_seed());
  std::vector<double> diffs;
  diffs.reserve(rows.size());
  for (const auto& r : rows) diffs.push_back(r[trans_col] - r[base_col]);
  const MeanSE d = mean_se(diffs);
  rep.difference = d.mean;
  rep.combined_se = d.se;
  rep.verdict = equality_verdict(d.mean, d.se, policy);
  rep.z = rep.verdict.statistic;
  rep.seed_path = stream.path_string();
  return rep;
}

}  // namespace

std::vector<InvarianceReport> tilt_invariance_grid(
    const SamplerSpec& sampler, const std::vector<BatteryEntry>& battery,
    const std::vector<double>& ts, const CheckBudget& budget,
    const RandomStream& stream, const RunPolicy& policy) {
  validate_battery(battery);
  if (ts.empty()) throw UsageError("tilt grid: empty t grid");
  if (budget.m_outer < 2) throw UsageError("tilt grid: m_outer must be >= 2");
  validate_sampler(sampler);

  const std::size_t B = battery.size();
  const std::size_t dim = B + ts.size() * B;
  const auto deadline = deadline_from(policy);
  std::vector<std::vector<double>> rows(budget.m_outer);
  parallel_for(policy.jobs, budget.m_outer, [&](std::uint64_t r) {
    check_deadline(deadline, "tilt_invariance");
    RandomStream rep_stream = stream.derive(static_cast<std::uint32_t>(r));
    RandomStream sampler_rng = rep_stream.derive(0);
    const MeasureSample sample = draw_sample(sampler, sampler_rng);
    RandomStream sign_rng = rep_stream.derive(1);
    const SignVector eps = draw_signs(sample.atom_count(), sign_rng);
    const RandomStream inner = rep_stream.derive(3);

    std::vector<double>& row = rows[r];
    row.resize(dim);
    GibbsAverager base_av(sample, policy.inner);
    for (std::size_t b = 0; b < B; ++b) {
      row[b] = base_av.average(battery[b].f, budget.m_inner, inner);
    }
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      const MeasureSample tilted = tilt(sample, ts[ti], eps);
      GibbsAverager av(tilted, policy.inner);
      for (std::size_t b = 0; b < B; ++b) {
        row[B + ti * B + b] = av.average(battery[b].f, budget.m_inner, inner);
      }
    }
  });

  std::vector<InvarianceReport> out;
  out.reserve(ts.size() * B);
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    for (std::size_t b = 0; b < B; ++b) {
      InvarianceReport rep = aggregate_pair(rows, b, B + ti * B + b,
                                            budget.m_inner, policy, stream);
      rep.function_id = battery[b].f.id;
      rep.n = battery[b].n;
      rep.t = ts[ti];
      out.push_back(std::move(rep));
    }
  }
  return out;
}

std::vector<InvarianceReport> deletion_invariance_grid(
    const SamplerSpec& sampler, const std::vector<BatteryEntry>& battery,
    const std::vector<std::uint32_t>& ss, const CheckBudget& budget,
    const RandomStream& stream, const RunPolicy& policy, DeletionMode mode) {
  validate_battery(battery);
  if (ss.empty()) throw UsageError("deletion grid: empty s list");
  for (auto s : ss) {
    if (s < 1) throw UsageError("deletion grid: s must be >= 1");
  }
  if (budget.m_outer < 2) {
    throw UsageError("deletion grid: m_outer must be >= 2");
  }
  validate_sampler(sampler);

  const std::size_t B = battery.size();
  // Row layout: baselines, then per (s, f) transformed values, then per-s
  // retry counts.
  const std::size_t dim = B + ss.size() * B + ss.size();
  const auto deadline = deadline_from(policy);
  std::vector<std::vector<double>> rows(budget.m_outer);
  parallel_for(policy.jobs, budget.m_outer, [&](std::uint64_t r) {
    check_deadline(deadline, "deletion_invariance");
    RandomStream rep_stream = stream.derive(static_cast<std::uint32_t>(r));
    RandomStream sampler_rng = rep_stream.derive(0);
    const MeasureSample sample = draw_sample(sampler, sampler_rng);
    const RandomStream inner = rep_stream.derive(3);

    std::vector<double>& row = rows[r];
    row.resize(dim);
    GibbsAverager base_av(sample, policy.inner);
    for (std::size_t b = 0; b < B; ++b) {
      row[b] = base_av.average(battery[b].f, budget.m_inner, inner);
    }
    for (std::size_t si = 0; si < ss.size(); ++si) {
      RandomStream del_rng =
          rep_stream.derive(2).derive(static_cast<std::uint32_t>(si));
      std::uint64_t retries = 0;
      const MeasureSample deleted =
          iterated_delete(sample, ss[si], del_rng, mode, 100, &retries);
      GibbsAverager av(deleted, policy.inner);
      for (std::size_t b = 0; b < B; ++b) {
        row[B + si * B + b] = av.average(battery[b].f, budget.m_inner, inner);
      }
      row[B + ss.size() * B + si] = static_cast<double>(retries);
    }
  });

  std::vector<InvarianceReport> out;
  out.reserve(ss.size() * B);
  for (std::size_t si = 0; si < ss.size(); ++si) {
    NeumaierSum retry_sum;
    for (const auto& r : rows) retry_sum.add(r[B + ss.size() * B + si]);
    for (std::size_t b = 0; b < B; ++b) {
      InvarianceReport rep = aggregate_pair(rows, b, B + si * B + b,
                                            budget.m_inner, policy, stream);
      rep.function_id = battery[b].f.id;
      rep.n = battery[b].n;
      rep.s = static_cast<int>(ss[si]);
      rep.retries = static_cast<std::uint64_t>(retry_sum.value());
      out.push_back(std::move(rep));
    }
  }
  return out;
}

InvarianceReport tilt_invariance_test(const SamplerSpec& sampler,
                                      const OverlapFunction& f, int n,
                                      double t, const CheckBudget& budget,
                                      const RandomStream& stream,
                                      const RunPolicy& policy) {
  return tilt_invariance_grid(sampler, {{f, n}}, {t}, budget, stream,
                              policy)[0];
}

InvarianceReport deletion_invariance_test(const SamplerSpec& sampler,
                                          const OverlapFunction& f, int n,
                                          std::uint32_t s,
                                          const CheckBudget& budget,
                                          const RandomStream& stream,
                                          const RunPolicy& policy,
                                          DeletionMode mode) {
  return deletion_invariance_grid(sampler, {{f, n}}, {s}, budget, stream,
                                  policy, mode)[0];
}

// ---------------------------------------------------------------------------
// Derivative machinery
// ---------------------------------------------------------------------------

int sign_contrast(const SignVector& eps,
                  std::span<const std::uint32_t> replica_slots) {
  if (replica_slots.size() < 2) {
    throw UsageError("sign_contrast: needs at least two replicas");
  }
  const int n = static_cast<int>(replica_slots.size()) - 1;
  int sum = 0;
  for (int l = 0; l < n; ++l) sum += eps.eps[replica_slots[static_cast<std::size_t>(l)]];
  return sum - n * eps.eps[replica_slots[static_cast<std::size_t>(n)]];
}

DerivativeEstimate derivative_at_zero(const SamplerSpec& sampler,
                                      const OverlapFunction& f, int n, int k,
                                      const CheckBudget& budget,
                                      const RandomStream& stream,
                                      const RunPolicy& policy) {
  if (n < 1 || f.arity > n) {
    throw UsageError("derivative_at_zero: needs n >= 1 and f arity <= n");
  }
  if (k < 1) throw UsageError("derivative_at_zero: k must be >= 1");
  if (budget.m_outer < 2 || budget.m_inner < 1) {
    throw UsageError("derivative_at_zero: insufficient budget");
  }
  validate_sampler(sampler);

  double bound = f.bound;
  for (int j = n; j < n + k; ++j) bound *= 2.0 * j;

  const int replicas = n + k;
  const auto deadline = deadline_from(policy);
  // Per-rep row: [inner mean, max |integrand|].
  std::vector<std::vector<double>> rows(budget.m_outer);
  parallel_for(policy.jobs, budget.m_outer, [&](std::uint64_t r) {
    check_deadline(deadline, "derivative_at_zero");
    RandomStream rep_stream = stream.derive(static_cast<std::uint32_t>(r));
    RandomStream sampler_rng = rep_stream.derive(0);
    const MeasureSample sample = draw_sample(sampler, sampler_rng);
    RandomStream sign_rng = rep_stream.derive(1);
    const SignVector eps = draw_signs(sample.atom_count(), sign_rng);
    RandomStream inner = rep_stream.derive(3);

    const auto& w = sample.weights().slots();
    const std::size_t K = w.size();
    std::vector<double> cum(K);
    NeumaierSum run;
    for (std::size_t i = 0; i < K; ++i) {
      run.add(w[i]);
      cum[i] = run.value();
    }

    std::vector<std::size_t> idx(static_cast<std::size_t>(replicas));
    std::vector<double> mat(static_cast<std::size_t>(n) * n);
    const ReplicaOverlaps view(mat.data(), n);
    NeumaierSum acc;
    double local_max = 0.0;
    for (std::uint64_t draw = 0; draw < budget.m_inner; ++draw) {
      for (int a = 0; a < replicas; ++a) {
        const double u = inner.uniform01() * cum.back();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        idx[static_cast<std::size_t>(a)] = std::min<std::size_t>(
            static_cast<std::size_t>(it - cum.begin()), K - 1);
      }
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          mat[static_cast<std::size_t>(a) * n + b] =
              overlap_at(sample.overlaps(), idx[static_cast<std::size_t>(a)],
                         idx[static_cast<std::size_t>(b)]);
        }
      }
      const double fval = f.eval(view);
      int prefix = 0;
      for (int l = 0; l < n; ++l) prefix += eps.eps[idx[static_cast<std::size_t>(l)]];
      double product = 1.0;
      for (int j = n; j < replicas; ++j) {
        const int sj = eps.eps[idx[static_cast<std::size_t>(j)]];
        product *= static_cast<double>(prefix - j * sj);
        prefix += sj;
      }
      const double integrand = fval * product;
      if (!(std::abs(integrand) <= bound)) {
        throw InternalCheckError(
            "derivative_at_zero: pointwise bound breached: |" +
            std::to_string(integrand) + "| > " + std::to_string(bound));
      }
      local_max = std::max(local_max, std::abs(integrand));
      acc.add(integrand);
    }
    rows[r] = {acc.value() / static_cast<double>(budget.m_inner), local_max};
  });

  DerivativeEstimate est;
  est.k = k;
  est.n = n;
  est.function_id = f.id;
  est.bound = bound;
  est.draws = budget.m_outer * budget.m_inner;
  est.seed_path = stream.path_string();
  const MeanSE agg = mean_se(column(rows, 0));
  est.estimate = agg.mean;
  est.se = agg.se;
  for (const auto& r : rows) est.max_abs_integrand = std::max(est.max_abs_integrand, r[1]);
  est.verdict = equality_verdict(est.estimate, est.se, policy);
  return est;
}

// ---------------------------------------------------------------------------
// Limit consistency
// ---------------------------------------------------------------------------

LimitReport limit_consistency(const SamplerSpec& sampler,
                              const OverlapFunction& f, int n, double t_large,
                              std::uint64_t m_samples,
                              const RandomStream& stream,
                              const RunPolicy& policy, double mass_floor,
                              double gap_tolerance) {
  if (n < 2 || f.arity > n) {
    throw UsageError("limit_consistency: needs n >= 2 and f arity <= n");
  }
  if (!(t_large >= 0.0)) {
    throw UsageError("limit_consistency: t must be >= 0");
  }
  if (m_samples < 2) throw UsageError("limit_consistency: m_samples >= 2");
  validate_sampler(sampler);

  const auto deadline = deadline_from(policy);
  // Per-rep row: [tilted, deleted, gap, envelope, retained mass, skipped].
  std::vector<std::vector<double>> rows(m_samples);
  parallel_for(policy.jobs, m_samples, [&](std::uint64_t r) {
    check_deadline(deadline, "limit_consistency");
    RandomStream rep_stream = stream.derive(static_cast<std::uint32_t>(r));
    RandomStream sampler_rng = rep_stream.derive(0);
    const MeasureSample sample = draw_sample(sampler, sampler_rng);
    RandomStream sign_rng = rep_stream.derive(1);
    const SignVector eps = draw_signs(sample.atom_count(), sign_rng);
    const RetentionVector eta = retention_from_signs(eps);
    const double mass = retained_mass(sample, eta);
    auto& row = rows[r];
    if (!(mass > 0.0)) {
      row = {0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
      return;
    }
    const MeasureSample tilted = tilt(sample, t_large, eps);
    const MeasureSample deleted = delete_atoms(sample, eta);
    GibbsAverager tilt_av(tilted, policy.inner);
    GibbsAverager del_av(deleted, policy.inner);
    const auto tv = tilt_av.exact_average(f);
    const auto dv = del_av.exact_average(f);
    if (!tv || !dv) {
      throw BudgetExceededError(
          "limit_consistency: exact averaging exceeds the enumeration budget "
          "for this sample");
    }
    const double gap = std::abs(*tv - *dv);
    const double envelope =
        2.0 * n * f.bound * std::exp(-2.0 * t_large) / mass;
    row = {*tv, *dv, gap, envelope, mass, 0.0};
  });

  LimitReport report;
  report.t = t_large;
  report.n = n;
  report.function_id = f.id;
  report.mass_floor = mass_floor;
  report.gap_tolerance = gap_tolerance;
  report.seed_path = stream.path_string();
  std::vector<double> tilted_vals, deleted_vals;
  for (const auto& row : rows) {
    if (row[5] != 0.0) {
      ++report.degenerate_skips;
      continue;
    }
    tilted_vals.push_back(row[0]);
    deleted_vals.push_back(row[1]);
    const double gap = row[2];
    const double envelope = row[3];
    const double mass = row[4];
    report.max_gap_all = std::max(report.max_gap_all, gap);
    if (mass >= mass_floor) report.max_gap = std::max(report.max_gap, gap);
    report.max_envelope = std::max(report.max_envelope, envelope);
    report.min_retained_mass = std::min(report.min_retained_mass, mass);
    if (gap > envelope + 1e-12) report.envelope_ok = false;
  }
  const MeanSE tagg = mean_se(tilted_vals);
  const MeanSE dagg = mean_se(deleted_vals);
  report.tilted = {tagg.mean, tagg.se, 1, tilted_vals.size(),
                   stream.root_seed()};
  report.deleted = {dagg.mean, dagg.se, 1, deleted_vals.size(),
                    stream.root_seed()};
  report.pass = report.envelope_ok && report.max_gap <= gap_tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Ordered weights
// ---------------------------------------------------------------------------

OrderedWeightsReport ordered_weights_comparison(
    const SamplerSpec& sampler, std::size_t L, std::uint64_t M,
    const RandomStream& stream, const RunPolicy& policy, std::uint32_t s,
    double level) {
  if (L < 1) throw UsageError("ordered_weights: L must be >= 1");
  if (M < 1000) throw UsageError("ordered_weights: needs M >= 1000 draws");
  validate_sampler(sampler);

  const auto deadline = deadline_from(policy);
  std::vector<std::vector<double>> rows(M);
  std::vector<double> retry_col(M, 0.0);
  std::size_t clamped = L;
  {
    RandomStream probe = stream.derive(0).derive(0);
    const MeasureSample sample = draw_sample(sampler, probe);
    clamped = std::min<std::size_t>(L, sample.atom_count());
  }
  const std::size_t pairs = clamped * (clamped - 1) / 2;
  const std::size_t coords = clamped + pairs;

  parallel_for(policy.jobs, M, [&](std::uint64_t r) {
    check_deadline(deadline, "ordered_weights");
    RandomStream rep_stream = stream.derive(static_cast<std::uint32_t>(r));
    RandomStream sampler_rng = rep_stream.derive(0);
    const MeasureSample sample = draw_sample(sampler, sampler_rng);
    RandomStream del_rng = rep_stream.derive(2);
    std::uint64_t retries = 0;
    const MeasureSample deleted = iterated_delete(
        sample, s, del_rng, DeletionMode::SingleShot, 100, &retries);
    retry_col[r] = static_cast<double>(retries);

    auto coords_of = [&](const MeasureSample& m_sample,
                         std::vector<double>& out) {
      const auto top = m_sample.weights().top_atoms(clamped);
      for (std::size_t i = 0; i < clamped; ++i) {
        out.push_back(m_sample.weights()[top[i]]);
      }
      for (std::size_t i = 0; i < clamped; ++i) {
        for (std::size_t j = i + 1; j < clamped; ++j) {
          out.push_back(overlap_at(m_sample.overlaps(), top[i], top[j]));
        }
      }
    };
    auto& row = rows[r];
    row.reserve(2 * coords);
    coords_of(sample, row);
    coords_of(deleted, row);
  });

  OrderedWeightsReport report;
  report.L = clamped;
  report.M = M;
  report.level = level;
  report.corrected_level = level / static_cast<double>(coords);
  report.seed_path = stream.path_string();
  NeumaierSum retry_sum;
  for (double x : retry_col) retry_sum.add(x);
  report.retries = static_cast<std::uint64_t>(retry_sum.value());

  auto coord_name = [&](std::size_t c) -> std::string {
    if (c < clamped) return "w" + std::to_string(c + 1);
    std::size_t k = c - clamped;
    for (std::size_t i = 0; i < clamped; ++i) {
      for (std::size_t j = i + 1; j < clamped; ++j) {
        if (k == 0) {
          return "r" + std::to_string(i + 1) + std::to_string(j + 1);
        }
        --k;
      }
    }
    return "coord" + std::to_string(c);
  };

  for (std::size_t c = 0; c < coords; ++c) {
    std::vector<double> xs, ys;
    xs.reserve(M);
    ys.reserve(M);
    for (const auto& row : rows) {
      xs.push_back(row[c]);
      ys.push_back(row[coords + c]);
    }
    OrderedWeightsCoordinate coord;
    coord.name = coord_name(c);
    coord.verdict = ks_two_sample(xs, ys, report.corrected_level);
    report.pass = report.pass && coord.verdict.pass;
    report.coords.push_back(std::move(coord));
  }
  return report;
}

}  // namespace ggsim
