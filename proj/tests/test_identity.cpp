#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ggsim/errors.hpp"
#include "ggsim/identity.hpp"

using namespace ggsim;

namespace {

SamplerSpec control_sampler() {
  return PointMassSampler{std::make_shared<MeasureSample>(
      negative_control({0.8, 0.2}, {1, 0, 0, 1}))};
}

SamplerSpec one_level(std::uint32_t c = 512, double zeta = 0.5) {
  return CascadeSampler{CascadeParams{{zeta}, {1.0}, c}};
}

SamplerSpec two_level(std::uint32_t c = 16) {
  return CascadeSampler{CascadeParams{{0.3, 0.6}, {0.3, 0.9}, c}};
}

RunPolicy quick_policy() {
  RunPolicy p;
  p.jobs = 2;
  return p;
}

SignVector signs(std::initializer_list<int> xs) {
  SignVector v;
  for (int x : xs) v.eps.push_back(static_cast<std::int8_t>(x));
  return v;
}

}  // namespace

TEST_CASE("sign contrast arithmetic") {
  const SignVector eps = signs({1, -1, 1, -1});
  const std::vector<std::uint32_t> r012 = {0, 1, 2};
  CHECK(sign_contrast(eps, r012) == -2);  // 1 - 1 - 2*1

  const std::vector<std::uint32_t> same = {3, 3, 3, 3};
  CHECK(sign_contrast(eps, same) == 0);

  const SignVector eps2 = signs({1, 1, 1, -1});
  const std::vector<std::uint32_t> all = {0, 1, 2, 3};
  CHECK(sign_contrast(eps2, all) == 6);  // 3 + 3 = 2n at n = 3
}

TEST_CASE("constant-f residual is exactly zero, not statistically") {
  RunPolicy policy = quick_policy();
  for (const auto& sampler : {one_level(128), two_level(8)}) {
    for (int n : {2, 3}) {
      for (int p : {1, 2, 3}) {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
          GGCheckSpec spec{n, p, make_function("one", n), {64, 32}};
          const GGResidualReport rep =
              gg_residual(sampler, spec, RandomStream(seed), policy);
          CHECK(rep.residual.mean == 0.0);
          CHECK(rep.verdict.pass);
        }
      }
    }
  }
}

TEST_CASE("negative-control residual equals the enumerated value exactly") {
  GGCheckSpec spec{2, 1, make_function("r12", 2), {128, 64}};
  const GGResidualReport rep =
      gg_residual(control_sampler(), spec, RandomStream(3), quick_policy());
  CHECK(rep.lhs.mean == doctest::Approx(0.52).epsilon(1e-13));
  CHECK(rep.rhs.mean == doctest::Approx(0.5712).epsilon(1e-13));
  CHECK(rep.residual.mean == doctest::Approx(-0.0512).epsilon(1e-12));
  CHECK(rep.residual.se == 0.0);
  CHECK_FALSE(rep.verdict.pass);
  CHECK(rep.verdict.infinite_statistic);
}

TEST_CASE("one-level closed form: both sides near 0.375") {
  GGCheckSpec spec{2, 1, make_function("r12", 2), {500, 64}};
  const GGResidualReport rep =
      gg_residual(one_level(512), spec, RandomStream(11), quick_policy());
  CHECK(std::abs(rep.lhs.mean - 0.375) <= 3.0 * rep.lhs.se);
  CHECK(std::abs(rep.rhs.mean - 0.375) <= 3.0 * rep.rhs.se);
  CHECK(rep.verdict.pass);
}

TEST_CASE("pairing the sides does not increase the residual SE") {
  GGCheckSpec spec{2, 1, make_function("r12", 2), {400, 64}};
  const GGResidualReport paired = gg_residual(
      one_level(128), spec, RandomStream(13), quick_policy(), true);
  const GGResidualReport unpaired = gg_residual(
      one_level(128), spec, RandomStream(13), quick_policy(), false);
  CHECK(paired.residual.se <= unpaired.residual.se);
}

TEST_CASE("gg_residual validates its spec") {
  GGCheckSpec bad_n{1, 1, make_function("one", 1), {16, 16}};
  CHECK_THROWS_AS(
      gg_residual(one_level(32), bad_n, RandomStream(1), quick_policy()),
      UsageError);
  GGCheckSpec bad_p{2, 0, make_function("r12", 2), {16, 16}};
  CHECK_THROWS_AS(
      gg_residual(one_level(32), bad_p, RandomStream(1), quick_policy()),
      UsageError);
}

TEST_CASE("tilt at t = 0 gives an exactly zero difference") {
  const InvarianceReport rep =
      tilt_invariance_test(two_level(8), make_function("r12", 2), 2, 0.0,
                           {64, 32}, RandomStream(4), quick_policy());
  CHECK(rep.difference == 0.0);
  CHECK(rep.verdict.pass);
}

TEST_CASE("tilt invariance holds on the cascade and fails on the control") {
  const InvarianceReport good =
      tilt_invariance_test(one_level(256), make_function("r12", 2), 2, 1.0,
                           {1500, 64}, RandomStream(6), quick_policy());
  CHECK(good.verdict.pass);

  // Exact enumeration over the four sign patterns gives E<R12>_1 = 0.7105,
  // far from 0.68 at this budget.
  const InvarianceReport bad =
      tilt_invariance_test(control_sampler(), make_function("r12", 2), 2, 1.0,
                           {2000, 64}, RandomStream(7), quick_policy());
  CHECK(std::abs(bad.z) > 3.0);
  CHECK(std::abs(bad.difference - 0.030485) < 0.012);
  CHECK_FALSE(bad.verdict.pass);
}

TEST_CASE("deletion invariance holds on the cascade, rejects the control") {
  const InvarianceReport good =
      deletion_invariance_test(one_level(256), make_function("r12", 2), 2, 1,
                               {1500, 64}, RandomStream(8), quick_policy());
  CHECK(good.verdict.pass);

  const InvarianceReport bad =
      deletion_invariance_test(control_sampler(), make_function("r12", 2), 2,
                               1, {5000, 64}, RandomStream(9), quick_policy());
  CHECK(std::abs(bad.difference - 0.21333) < 0.01);
  CHECK_FALSE(bad.verdict.pass);
}

TEST_CASE("both deletion code paths give consistent estimates") {
  const InvarianceReport single = deletion_invariance_test(
      one_level(128), make_function("r12", 2), 2, 2, {800, 64},
      RandomStream(10), quick_policy(), DeletionMode::SingleShot);
  const InvarianceReport sequential = deletion_invariance_test(
      one_level(128), make_function("r12", 2), 2, 2, {800, 64},
      RandomStream(11), quick_policy(), DeletionMode::Sequential);
  const TestVerdict v =
      z_equality_test(single.transformed, sequential.transformed);
  CHECK(v.pass);
}

TEST_CASE("forced single-survivor deletion with constant f changes nothing") {
  const MeasureSample s = negative_control({0.25, 0.25, 0.25, 0.25},
                                           {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1,
                                            0, 0, 0, 0, 1});
  RetentionVector eta;
  eta.eta = {1, 0, 0, 0};
  const MeasureSample d = delete_atoms(s, eta);
  const auto one = make_function("one", 2);
  CHECK(gibbs_exact(s, one) - gibbs_exact(d, one) == 0.0);
}

TEST_CASE("derivative estimates vanish and respect the pointwise bound") {
  RunPolicy policy = quick_policy();
  for (int k : {1, 2, 3}) {
    const DerivativeEstimate est =
        derivative_at_zero(two_level(16), make_function("r12", 2), 2, k,
                           {400, 256}, RandomStream(20 + k), policy);
    CHECK(est.max_abs_integrand <= est.bound);
    CHECK(est.verdict.pass);
    if (k == 2) CHECK(est.bound == 24.0);  // 2^2 * 2 * 3
    if (k == 3) CHECK(est.bound == 192.0);
  }
  // Constant f, k = 1: the sign symmetry alone forces the zero.
  const DerivativeEstimate c =
      derivative_at_zero(one_level(64), make_function("one", 2), 2, 1,
                         {400, 256}, RandomStream(30), policy);
  CHECK(std::abs(c.estimate) <= 3.0 * c.se + 1e-12);
  CHECK(c.bound == 4.0);  // 2 * n with n = 2
}

TEST_CASE("two-atom limit case matches to 1e-15") {
  const auto sample = std::make_shared<MeasureSample>(
      negative_control({0.5, 0.5}, {1, 0, 0, 1}));
  const MeasureSample tilted = tilt(*sample, 20.0, signs({1, -1}));
  RetentionVector eta;
  eta.eta = {1, 0};
  const MeasureSample deleted = delete_atoms(*sample, eta);
  const auto f = make_function("r12", 2);
  const double a = gibbs_exact(tilted, f);
  const double b = gibbs_exact(deleted, f);
  CHECK(b == 1.0);
  CHECK(std::abs(a - b) <= 1e-15);
}

TEST_CASE("limit consistency holds at t = 20 on the cascade") {
  const LimitReport rep =
      limit_consistency(two_level(16), make_function("r12", 2), 2, 20.0, 100,
                        RandomStream(40), quick_policy());
  CHECK(rep.envelope_ok);
  CHECK(rep.max_gap <= 1e-6);
  CHECK(rep.pass);
}

TEST_CASE("the group-splitting envelope holds on small gram measures") {
  // Random unit vectors give a valid gram; exhaustively check the bound
  // constant 2 n e^{-2t} / retained-mass at moderate t on K <= 8 atoms.
  RandomStream rng(41);
  auto normal = [&rng]() {
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t K = 2 + rng.below(7);
    const std::size_t d = 3;
    std::vector<std::vector<double>> v(K, std::vector<double>(d));
    for (auto& x : v) {
      double norm = 0.0;
      for (auto& c : x) {
        c = normal();
        norm += c * c;
      }
      norm = std::sqrt(norm);
      for (auto& c : x) c /= norm;
    }
    std::vector<double> gram(K * K);
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += v[i][c] * v[j][c];
        gram[i * K + j] = std::min(1.0, std::max(-1.0, dot));
      }
    }
    std::vector<double> w(K);
    for (auto& x : w) x = 0.05 + rng.uniform01();
    SamplerSpec sampler;
    try {
      sampler = PointMassSampler{
          std::make_shared<MeasureSample>(negative_control(w, gram))};
    } catch (const UsageError&) {
      continue;  // clipping may break PSD marginally; skip such draws
    }
    const double t = 2.0 + 4.0 * rng.uniform01();
    const LimitReport rep =
        limit_consistency(sampler, make_function("r12_sq", 2), 2, t, 24,
                          RandomStream(500 + trial), quick_policy());
    CHECK(rep.envelope_ok);
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("t = 0 limit report shows the control discrepancy") {
  const LimitReport rep =
      limit_consistency(control_sampler(), make_function("r12", 2), 2, 0.0,
                        200, RandomStream(42), quick_policy());
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_gap > 0.25);  // <f> = 0.68 vs <f>' = 1 on lopsided draws
}

TEST_CASE("ordered-weights comparison: trivial, null and control cases") {
  // Single-atom measure: top weight is 1 on both sides, statistic 0.
  const SamplerSpec one_atom = PointMassSampler{
      std::make_shared<MeasureSample>(negative_control({1.0}, {1.0}))};
  const OrderedWeightsReport trivial = ordered_weights_comparison(
      one_atom, 1, 1500, RandomStream(50), quick_policy());
  CHECK(trivial.pass);
  CHECK(trivial.coords.size() == 1);
  CHECK(trivial.coords[0].verdict.statistic == 0.0);

  // One-level cascade: no rejection expected at the corrected level.
  const OrderedWeightsReport null_case = ordered_weights_comparison(
      one_level(64), 2, 2000, RandomStream(51), quick_policy());
  CHECK(null_case.pass);
  CHECK(null_case.coords.size() == 3);  // w1, w2, r12

  // Control: w1 is 0.8 under the measure, {0.8, 1, 1}/3 after deletion.
  const OrderedWeightsReport control = ordered_weights_comparison(
      control_sampler(), 2, 2000, RandomStream(52), quick_policy());
  CHECK_FALSE(control.pass);
  CHECK_FALSE(control.coords[0].verdict.pass);  // the w1 coordinate
  CHECK(control.coords[0].verdict.statistic ==
        doctest::Approx(2.0 / 3.0).epsilon(0.05));
}

TEST_CASE("ordered-weights preconditions") {
  CHECK_THROWS_AS(ordered_weights_comparison(one_level(16), 2, 999,
                                             RandomStream(1), quick_policy()),
                  UsageError);
}
