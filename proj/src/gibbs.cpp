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

#include "ggsim/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ggsim/errors.hpp"
#include "ggsim/numeric.hpp"
#include "ggsim/parallel.hpp"

namespace ggsim {

namespace {

// Replicas the function can actually see, via its declared read set.
struct Reduction {
  int m = 0;                 // effective replica count
  std::vector<int> remap;    // original replica -> compact index (size arity)
  bool reads_diagonal_only = false;
};

Reduction reduce_function(const OverlapFunction& f) {
  Reduction red;
  red.remap.assign(static_cast<std::size_t>(f.arity), 0);
  std::vector<int> involved;
  for (auto [i, j] : f.reads) {
    if (i < 0 || j < 0 || i >= f.arity || j >= f.arity) {
      throw UsageError("function '" + f.id + "' reads outside its arity");
    }
    involved.push_back(i);
    involved.push_back(j);
  }
  std::sort(involved.begin(), involved.end());
  involved.erase(std::unique(involved.begin(), involved.end()),
                 involved.end());
  red.m = static_cast<int>(involved.size());
  for (int c = 0; c < red.m; ++c) red.remap[involved[c]] = c;
  bool off_diag = false;
  for (auto [i, j] : f.reads) off_diag |= (i != j);
  red.reads_diagonal_only = !off_diag;
  return red;
}

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > cap / std::max<std::uint64_t>(base, 1)) return cap + 1;
    out *= base;
  }
  return out;
}

// Full K^m enumeration with compensated summation.
double enumerate_average(const MeasureSample& sample, const OverlapFunction& f,
                         const Reduction& red) {
  const auto& w = sample.weights().slots();
  const std::size_t K = w.size();
  const int m = red.m;
  std::vector<std::size_t> idx(static_cast<std::size_t>(std::max(m, 1)), 0);
  std::vector<double> mat(static_cast<std::size_t>(m) * m, 0.0);
  const ReplicaOverlaps view(mat.data(), m, red.remap.data());
  NeumaierSum acc;
  while (true) {
    double wp = 1.0;
    for (int a = 0; a < m; ++a) wp *= w[idx[static_cast<std::size_t>(a)]];
    if (wp != 0.0) {
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          mat[static_cast<std::size_t>(a) * m + b] = overlap_at(
              sample.overlaps(), idx[static_cast<std::size_t>(a)],
              idx[static_cast<std::size_t>(b)]);
        }
      }
      acc.add(wp * f.eval(view));
    }
    // odometer
    int pos = m - 1;
    while (pos >= 0) {
      if (++idx[static_cast<std::size_t>(pos)] < K) break;
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return acc.value();
}

}  // namespace

namespace detail {

// Ancestor-depth tables of a tree-overlap sample: S2[d] / S3[d] are the sums
// of squared / cubed subtree masses at depth d, and M(a,b) (a <= b) is
// sum over depth-a nodes u of m_u * sum over depth-b descendants v of m_v^2.
// These determine the joint ancestor-depth law of up to three replicas.
struct TreeTables {
  int r = 0;
  std::vector<double> S2, S3;         // indexed 0..r (virtual r+1 entry = 0)
  std::vector<std::vector<double>> M;  // M[a][b-a] for a < b <= r

  double s2(int d) const { return d <= r ? S2[static_cast<std::size_t>(d)] : 0.0; }
  double s3(int d) const { return d <= r ? S3[static_cast<std::size_t>(d)] : 0.0; }
  double mab(int a, int b) const {
    if (a > r || b > r) return 0.0;
    if (a == b) return s3(a);
    return M[static_cast<std::size_t>(a)][static_cast<std::size_t>(b - a - 1)];
  }
};

}  // namespace detail

namespace {

std::shared_ptr<detail::TreeTables> build_tree_tables(
    const TreeOverlaps& tree, const std::vector<double>& w) {
  auto t = std::make_shared<detail::TreeTables>();
  const int r = static_cast<int>(tree.levels);
  const std::size_t c = tree.branching;
  t->r = r;
  // Subtree masses per depth, leaves at depth r.
  std::vector<std::vector<double>> mass(static_cast<std::size_t>(r) + 1);
  mass[static_cast<std::size_t>(r)] = w;
  for (int d = r - 1; d >= 0; --d) {
    const auto& lower = mass[static_cast<std::size_t>(d) + 1];
    std::vector<double> upper(lower.size() / c);
    for (std::size_t u = 0; u < upper.size(); ++u) {
      NeumaierSum s;
      for (std::size_t k = 0; k < c; ++k) s.add(lower[u * c + k]);
      upper[u] = s.value();
    }
    mass[static_cast<std::size_t>(d)] = std::move(upper);
  }
  t->S2.resize(static_cast<std::size_t>(r) + 1);
  t->S3.resize(static_cast<std::size_t>(r) + 1);
  for (int d = 0; d <= r; ++d) {
    NeumaierSum s2, s3;
    for (double m : mass[static_cast<std::size_t>(d)]) {
      s2.add(m * m);
      s3.add(m * m * m);
    }
    t->S2[static_cast<std::size_t>(d)] = s2.value();
    t->S3[static_cast<std::size_t>(d)] = s3.value();
  }
  t->M.resize(static_cast<std::size_t>(r));
  for (int b = 1; b <= r; ++b) {
    std::vector<double> arr(mass[static_cast<std::size_t>(b)].size());
    for (std::size_t v = 0; v < arr.size(); ++v) {
      const double m = mass[static_cast<std::size_t>(b)][v];
      arr[v] = m * m;
    }
    for (int a = b - 1; a >= 0; --a) {
      std::vector<double> up(arr.size() / c);
      for (std::size_t u = 0; u < up.size(); ++u) {
        NeumaierSum s;
        for (std::size_t k = 0; k < c; ++k) s.add(arr[u * c + k]);
        up[u] = s.value();
      }
      arr = std::move(up);
      NeumaierSum dot;
      const auto& ma = mass[static_cast<std::size_t>(a)];
      for (std::size_t u = 0; u < arr.size(); ++u) dot.add(ma[u] * arr[u]);
      t->M[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(r - a));
      t->M[static_cast<std::size_t>(a)][static_cast<std::size_t>(b - a - 1)] =
          dot.value();
    }
  }
  return t;
}

// Exact <f> on a tree model for up to three effective replicas, through the
// ancestor-depth law instead of K^m enumeration.
double tree_exact(const detail::TreeTables& t, const TreeOverlaps& tree,
                  const OverlapFunction& f, const Reduction& red) {
  const int m = red.m;
  const double qr = tree.self_overlap(0);
  if (m == 0) {
    const double zero = 0.0;
    return f.eval(ReplicaOverlaps(&zero, 1, red.remap.data()));
  }
  if (m == 1) {
    return f.eval(ReplicaOverlaps(&qr, 1, red.remap.data()));
  }
  const int r = t.r;
  if (m == 2) {
    double mat[4] = {qr, 0.0, 0.0, qr};
    const ReplicaOverlaps view(mat, 2, red.remap.data());
    NeumaierSum acc;
    for (int d = 0; d <= r; ++d) {
      const double p = t.s2(d) - (d < r ? t.s2(d + 1) : 0.0);
      const double q = tree.q_at_depth(d);
      mat[1] = q;
      mat[2] = q;
      acc.add(p * f.eval(view));
    }
    return acc.value();
  }
  // m == 3: the three pairwise ancestor depths are (a,a,b) with a <= b; the
  // replica outside the deeper pair is the "odd" one.
  double mat[9] = {qr, 0, 0, 0, qr, 0, 0, 0, qr};
  const ReplicaOverlaps view(mat, 3, red.remap.data());
  auto set = [&](int i, int j, double v) {
    mat[i * 3 + j] = v;
    mat[j * 3 + i] = v;
  };
  NeumaierSum acc;
  for (int a = 0; a <= r; ++a) {
    const double qa = tree.q_at_depth(a);
    const double taa = t.s3(a) - 3.0 * t.mab(a, a + 1) + 2.0 * t.s3(a + 1);
    set(0, 1, qa);
    set(0, 2, qa);
    set(1, 2, qa);
    acc.add(taa * f.eval(view));
    for (int b = a + 1; b <= r; ++b) {
      const double qb = tree.q_at_depth(b);
      const double tab =
          t.mab(a, b) - t.mab(a + 1, b) - t.mab(a, b + 1) + t.mab(a + 1, b + 1);
      double sum3 = 0.0;
      for (int odd = 0; odd < 3; ++odd) {
        const int u = (odd + 1) % 3;
        const int v = (odd + 2) % 3;
        set(u, v, qb);
        set(odd, u, qa);
        set(odd, v, qa);
        sum3 += f.eval(view);
      }
      acc.add(tab * sum3);
    }
  }
  return acc.value();
}

}  // namespace

GibbsAverager::GibbsAverager(const MeasureSample& sample, InnerPolicy policy)
    : sample_(sample), policy_(policy) {}

const detail::TreeTables& GibbsAverager::tables() {
  if (!tables_) {
    tables_ = build_tree_tables(*sample_.tree(), sample_.weights().slots());
  }
  return *tables_;
}

const std::vector<double>& GibbsAverager::cdf() {
  if (cdf_.empty()) {
    const auto& w = sample_.weights().slots();
    cdf_.resize(w.size());
    NeumaierSum run;
    for (std::size_t i = 0; i < w.size(); ++i) {
      run.add(w[i]);
      cdf_[i] = run.value();
    }
  }
  return cdf_;
}

std::optional<double> GibbsAverager::exact_average(const OverlapFunction& f) {
  const Reduction red = reduce_function(f);
  if (sample_.is_tree() && red.m <= 3) {
    return tree_exact(tables(), *sample_.tree(), f, red);
  }
  const std::uint64_t budget = policy_.mode == InnerPolicy::Mode::Auto
                                   ? policy_.auto_enumeration_budget
                                   : policy_.enumeration_budget;
  if (checked_pow(sample_.atom_count(), red.m, budget) <= budget) {
    return enumerate_average(sample_, f, red);
  }
  return std::nullopt;
}

double GibbsAverager::average(const OverlapFunction& f, std::uint64_t m_inner,
                              RandomStream rng, bool* exact) {
  if (policy_.mode != InnerPolicy::Mode::MonteCarlo) {
    if (auto v = exact_average(f)) {
      if (exact != nullptr) *exact = true;
      return *v;
    }
    if (policy_.mode == InnerPolicy::Mode::Exact) {
      throw BudgetExceededError(
          "exact inner averaging exceeds the enumeration budget; use the "
          "Monte Carlo inner mode");
    }
  }
  if (exact != nullptr) *exact = false;
  const Reduction red = reduce_function(f);
  if (red.m == 0) {
    if (exact != nullptr) *exact = true;
    const double zero = 0.0;
    return f.eval(ReplicaOverlaps(&zero, 1, red.remap.data()));
  }
  const auto& cum = cdf();
  const std::size_t K = cum.size();
  const int m = red.m;
  std::vector<std::size_t> idx(static_cast<std::size_t>(m));
  std::vector<double> mat(static_cast<std::size_t>(m) * m);
  const ReplicaOverlaps view(mat.data(), m, red.remap.data());
  NeumaierSum acc;
  for (std::uint64_t rep = 0; rep < m_inner; ++rep) {
    for (int a = 0; a < m; ++a) {
      const double u = rng.uniform01() * cum.back();
      const auto it = std::upper_bound(cum.begin(), cum.end(), u);
      idx[static_cast<std::size_t>(a)] =
          std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()),
                                K - 1);
    }
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        mat[static_cast<std::size_t>(a) * m + b] =
            overlap_at(sample_.overlaps(), idx[static_cast<std::size_t>(a)],
                       idx[static_cast<std::size_t>(b)]);
      }
    }
    acc.add(f.eval(view));
  }
  return acc.value() / static_cast<double>(m_inner);
}

double gibbs_exact(const MeasureSample& sample, const OverlapFunction& f,
                   std::uint64_t enumeration_budget) {
  const Reduction red = reduce_function(f);
  if (sample.is_tree() && red.m <= 3) {
    GibbsAverager av(sample);
    return *av.exact_average(f);
  }
  if (checked_pow(sample.atom_count(), red.m, enumeration_budget) >
      enumeration_budget) {
    throw BudgetExceededError(
        "gibbs_exact: enumeration over K^" + std::to_string(red.m) +
        " atom tuples exceeds the budget of " +
        std::to_string(enumeration_budget) + " evaluations; use gibbs_mc");
  }
  return enumerate_average(sample, f, red);
}

MCEstimate gibbs_mc(const MeasureSample& sample, const OverlapFunction& f,
                    std::uint64_t M, RandomStream& rng) {
  if (M < 2) throw UsageError("gibbs_mc: M must be >= 2");
  const Reduction red = reduce_function(f);
  MCEstimate est;
  est.m_inner = M;
  est.m_outer = 1;
  est.seed = rng.root_seed();
  if (red.m == 0) {
    const double zero = 0.0;
    est.mean = f.eval(ReplicaOverlaps(&zero, 1, red.remap.data()));
    est.se = 0.0;
    return est;
  }
  const auto& w = sample.weights().slots();
  const std::size_t K = w.size();
  std::vector<double> cum(K);
  NeumaierSum run;
  for (std::size_t i = 0; i < K; ++i) {
    run.add(w[i]);
    cum[i] = run.value();
  }
  const int m = red.m;
  std::vector<std::size_t> idx(static_cast<std::size_t>(m));
  std::vector<double> mat(static_cast<std::size_t>(m) * m);
  const ReplicaOverlaps view(mat.data(), m, red.remap.data());
  // Welford with a compensated mean so the estimate matches the summation
  // guarantees of the exact path.
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t rep = 0; rep < M; ++rep) {
    for (int a = 0; a < m; ++a) {
      const double u = rng.uniform01() * cum.back();
      const auto it = std::upper_bound(cum.begin(), cum.end(), u);
      idx[static_cast<std::size_t>(a)] =
          std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()),
                                K - 1);
    }
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        mat[static_cast<std::size_t>(a) * m + b] =
            overlap_at(sample.overlaps(), idx[static_cast<std::size_t>(a)],
                       idx[static_cast<std::size_t>(b)]);
      }
    }
    const double x = f.eval(view);
    const double d = x - mean;
    mean += d / static_cast<double>(rep + 1);
    m2 += d * (x - mean);
  }
  est.mean = mean;
  est.se = std::sqrt(std::max(m2, 0.0) / static_cast<double>(M - 1) /
                     static_cast<double>(M));
  return est;
}

MeasureSample draw_sample(const SamplerSpec& spec, RandomStream& rng) {
  if (const auto* pd = std::get_if<PDSampler>(&spec)) {
    WeightVector w = sample_pd(pd->zeta, pd->K, rng);
    const std::size_t K = w.size();
    std::vector<std::uint64_t> labels(K);
    std::iota(labels.begin(), labels.end(), 0u);
    if (K >= 2) {
      TreeOverlaps model{static_cast<std::uint32_t>(K), 1, {1.0}};
      return MeasureSample(std::move(w), std::move(model), std::move(labels),
                           rng.root_seed());
    }
    GramOverlaps model{1, {1.0}};
    return MeasureSample(std::move(w), std::move(model), std::move(labels),
                         rng.root_seed());
  }
  if (const auto* rpc = std::get_if<CascadeSampler>(&spec)) {
    return sample_rpc(rpc->params, rng);
  }
  return *std::get<PointMassSampler>(spec).sample;
}

std::string sampler_family(const SamplerSpec& spec) {
  if (std::holds_alternative<PDSampler>(spec)) return "pd";
  if (std::holds_alternative<CascadeSampler>(spec)) return "rpc";
  return "negative";
}

void validate_sampler(const SamplerSpec& spec) {
  if (const auto* pd = std::get_if<PDSampler>(&spec)) {
    if (!(pd->zeta > 0.0 && pd->zeta < 1.0)) {
      throw UsageError("pd sampler: zeta must lie strictly in (0,1)");
    }
    if (pd->K < 1) throw UsageError("pd sampler: K must be >= 1");
    return;
  }
  if (const auto* rpc = std::get_if<CascadeSampler>(&spec)) {
    rpc->params.validate();
    return;
  }
  if (!std::get<PointMassSampler>(spec).sample) {
    throw UsageError("point-mass sampler: missing sample");
  }
}

MCEstimate quenched_average(const SamplerSpec& sampler,
                            const OverlapFunction& f, std::uint64_t m_outer,
                            std::uint64_t m_inner, const RandomStream& stream,
                            InnerPolicy policy, int jobs) {
  if (m_outer < 2 || m_inner < 2) {
    throw UsageError("quenched_average: replication counts must be >= 2");
  }
  validate_sampler(sampler);
  std::vector<double> values(m_outer);
  parallel_for(jobs, m_outer, [&](std::uint64_t rep) {
    RandomStream rep_stream = stream.derive(static_cast<std::uint32_t>(rep));
    RandomStream sampler_rng = rep_stream.derive(0);
    const MeasureSample sample = draw_sample(sampler, sampler_rng);
    GibbsAverager av(sample, policy);
    values[rep] = av.average(f, m_inner, rep_stream.derive(1));
  });
  const MeanSE agg = mean_se(values);
  MCEstimate est;
  est.mean = agg.mean;
  est.se = agg.se;
  est.m_outer = m_outer;
  est.m_inner = m_inner;
  est.seed = stream.root_seed();
  return est;
}

}  // namespace ggsim
