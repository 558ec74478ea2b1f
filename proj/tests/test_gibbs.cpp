#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ggsim/errors.hpp"
#include "ggsim/gibbs.hpp"

using namespace ggsim;

namespace {

MeasureSample two_atom_control() {
  return negative_control({0.8, 0.2}, {1, 0, 0, 1});
}

// Re-expresses a tree sample through its dense Gram matrix so the generic
// enumerator can serve as the independent oracle for the tree fast path.
MeasureSample as_gram(const MeasureSample& s) {
  const std::size_t K = s.atom_count();
  std::vector<double> g(K * K);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      g[i * K + j] = overlap_at(s.overlaps(), i, j);
    }
  }
  std::vector<double> w = s.weights().slots();
  return MeasureSample(WeightVector(std::move(w)),
                       GramOverlaps{K, std::move(g)}, s.labels(), s.seed());
}

}  // namespace

TEST_CASE("the constant function averages to exactly one") {
  RandomStream rng(3);
  const MeasureSample tree =
      sample_rpc(CascadeParams{{0.3, 0.6}, {0.3, 0.9}, 8}, rng);
  CHECK(gibbs_exact(tree, make_function("one", 2)) == 1.0);
  CHECK(gibbs_exact(tree, make_function("one", 3)) == 1.0);
  CHECK(gibbs_exact(two_atom_control(), make_function("one", 2)) == 1.0);
}

TEST_CASE("hand-enumerated two-atom averages") {
  const MeasureSample s = two_atom_control();
  CHECK(gibbs_exact(s, make_function("r12", 2)) ==
        doctest::Approx(0.68).epsilon(1e-14));
  CHECK(gibbs_exact(s, make_function("r12_r13", 3)) ==
        doctest::Approx(0.52).epsilon(1e-14));
}

TEST_CASE("exact average is invariant under a simultaneous atom permutation") {
  // Three atoms, permute (0,1,2) -> (2,0,1) in both weights and gram.
  const std::vector<double> w = {0.5, 0.3, 0.2};
  const std::vector<double> g = {1.0, 0.4, 0.1, 0.4, 1.0, 0.7, 0.1, 0.7, 1.0};
  const MeasureSample a = negative_control(w, g);
  const std::vector<std::size_t> perm = {2, 0, 1};
  std::vector<double> wp(3);
  std::vector<double> gp(9);
  for (std::size_t i = 0; i < 3; ++i) {
    wp[i] = w[perm[i]];
    for (std::size_t j = 0; j < 3; ++j) {
      gp[i * 3 + j] = g[perm[i] * 3 + perm[j]];
    }
  }
  const MeasureSample b = negative_control(wp, gp);
  for (const char* id : {"r12", "r12_sq", "r12_r13"}) {
    const int arity = std::string(id) == "r12_r13" ? 3 : 2;
    CHECK(gibbs_exact(a, make_function(id, arity)) ==
          doctest::Approx(gibbs_exact(b, make_function(id, arity)))
              .epsilon(1e-12));
  }
}

TEST_CASE("replica relabeling gives bitwise-equal exact averages") {
  RandomStream rng(11);
  const MeasureSample s =
      sample_rpc(CascadeParams{{0.3, 0.6}, {0.3, 0.9}, 16}, rng);
  for (int p : {1, 2, 3}) {
    const auto f12 = times_overlap_power(make_function("one", 3), 0, 1, p);
    const auto f23 = times_overlap_power(make_function("one", 3), 1, 2, p);
    CHECK(gibbs_exact(s, f12) == gibbs_exact(s, f23));
  }
}

TEST_CASE("tree fast path matches dense enumeration") {
  // The dual route: closed-form ancestor-depth sums against the generic
  // K^m enumerator on the same measure expressed through its Gram matrix.
  int cases = 0;
  for (std::uint32_t seed = 0; seed < 6; ++seed) {
    for (const auto& params :
         {CascadeParams{{0.5}, {1.0}, 9}, CascadeParams{{0.3, 0.6}, {0.3, 0.9}, 3},
          CascadeParams{{0.2, 0.4, 0.7}, {0.2, 0.5, 0.8}, 2}}) {
      RandomStream rng(100 + seed);
      const MeasureSample tree = sample_rpc(params, rng);
      const MeasureSample gram = as_gram(tree);
      std::vector<OverlapFunction> fns = {
          make_function("r12", 2), make_function("r12_sq", 2),
          make_function("r12_ge", 2, 0.25), make_function("r12_r13", 3),
          times_overlap_power(make_function("r12", 2), 0, 2, 2),
          times_overlap_power(make_function("one", 2), 0, 1, 3)};
      for (const auto& f : fns) {
        CHECK(gibbs_exact(tree, f) ==
              doctest::Approx(gibbs_exact(gram, f)).epsilon(1e-12));
        ++cases;
      }
    }
  }
  CHECK(cases == 108);
}

TEST_CASE("monte carlo agrees with exact within four standard errors") {
  RandomStream seeds(17);
  int ok = 0;
  const int runs = 100;
  for (int run = 0; run < runs; ++run) {
    RandomStream rng = RandomStream(600 + run).derive(0);
    const MeasureSample s =
        sample_rpc(CascadeParams{{0.3, 0.6}, {0.3, 0.9}, 8}, rng);
    const auto f = make_function("r12", 2);
    const double exact = gibbs_exact(s, f);
    RandomStream mc_rng = RandomStream(600 + run).derive(1);
    const MCEstimate est = gibbs_mc(s, f, 4000, mc_rng);
    if (std::abs(est.mean - exact) <= 4.0 * est.se) ++ok;
  }
  CHECK(ok >= 98);
}

TEST_CASE("monte carlo of the constant has zero standard error") {
  RandomStream rng(5);
  const MeasureSample s = two_atom_control();
  const MCEstimate est = gibbs_mc(s, make_function("one", 2), 100, rng);
  CHECK(est.mean == 1.0);
  CHECK(est.se == 0.0);
}

TEST_CASE("single-atom sample evaluates f at the self-overlap matrix") {
  const MeasureSample s = negative_control({1.0}, {1.0});
  RandomStream rng(8);
  const MCEstimate est = gibbs_mc(s, make_function("r12", 2), 500, rng);
  CHECK(est.mean == 1.0);  // self-overlap is 1
  CHECK(est.se == 0.0);
  CHECK(gibbs_exact(s, make_function("r12_sq", 2)) == 1.0);
}

TEST_CASE("enumeration beyond the budget is refused") {
  // 60 atoms, 5 effective replicas: 60^5 = 7.8e8 > 1e8.
  const std::size_t K = 60;
  std::vector<double> w(K, 1.0), g(K * K, 0.0);
  for (std::size_t i = 0; i < K; ++i) g[i * K + i] = 1.0;
  const MeasureSample s = negative_control(w, g);
  auto f = make_function("one", 5);
  for (int j = 1; j < 5; ++j) f = times_overlap_power(f, 0, j, 1);
  CHECK_THROWS_AS(gibbs_exact(s, f), BudgetExceededError);
  RandomStream rng(4);
  CHECK_NOTHROW(gibbs_mc(s, f, 100, rng));
}

TEST_CASE("gibbs_mc requires at least two draws") {
  RandomStream rng(4);
  CHECK_THROWS_AS(gibbs_mc(two_atom_control(), make_function("r12", 2), 1, rng),
                  UsageError);
}

TEST_CASE("quenched average of the point-mass control has zero outer SE") {
  const SamplerSpec sampler = PointMassSampler{
      std::make_shared<MeasureSample>(two_atom_control())};
  const MCEstimate est = quenched_average(sampler, make_function("r12", 2),
                                          64, 64, RandomStream(21));
  CHECK(est.mean == doctest::Approx(0.68).epsilon(1e-14));
  CHECK(est.se == 0.0);
}

TEST_CASE("quenched moments of the one-level cascade match the oracle") {
  // E<R12> = E sum w^2 = 1 - zeta and E<R12 R13> = E sum w^3 = 0.375.
  const SamplerSpec sampler = CascadeSampler{CascadeParams{{0.5}, {1.0}, 1024}};
  const MCEstimate second = quenched_average(
      sampler, make_function("r12", 2), 800, 64, RandomStream(77),
      InnerPolicy{}, 2);
  CHECK(std::abs(second.mean - 0.5) <= 3.0 * second.se);
  const MCEstimate third = quenched_average(
      sampler, make_function("r12_r13", 3), 800, 64, RandomStream(78),
      InnerPolicy{}, 2);
  CHECK(std::abs(third.mean - 0.375) <= 3.0 * third.se);
}

TEST_CASE("quenched average is independent of the thread count") {
  const SamplerSpec sampler = CascadeSampler{CascadeParams{{0.4}, {1.0}, 64}};
  const auto f = make_function("r12_sq", 2);
  const MCEstimate a =
      quenched_average(sampler, f, 200, 32, RandomStream(5), InnerPolicy{}, 1);
  const MCEstimate b =
      quenched_average(sampler, f, 200, 32, RandomStream(5), InnerPolicy{}, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
}

TEST_CASE("registry functions honor their declared contract") {
  RandomStream rng(19);
  for (const auto& id : function_registry()) {
    const int arity = id == "r12_r13" ? 3 : (id == "one" ? 1 : 2);
    const auto f = make_function(id, arity);
    std::string message;
    CHECK_MESSAGE(spot_check_function(f, 200, rng, &message), message);
  }
  // A function that lies about its read set is caught.
  OverlapFunction liar = make_function("one", 2);
  liar.eval = [](const ReplicaOverlaps& o) { return o.at(0, 1); };
  std::string message;
  CHECK_FALSE(spot_check_function(liar, 200, rng, &message));
}

TEST_CASE("unknown ids and undersized arities are usage errors") {
  CHECK_THROWS_AS(make_function("r13", 2), UsageError);
  CHECK_THROWS_AS(make_function("r12", 1), UsageError);
  CHECK_THROWS_AS(make_function("r12_r13", 2), UsageError);
  CHECK_THROWS_AS(make_function("r12_ge", 2, 1.5), UsageError);
  CHECK_NOTHROW(make_function("r12_ge", 2, 0.5));
}
