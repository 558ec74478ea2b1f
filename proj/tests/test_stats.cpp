#include <doctest.h>

#include <cmath>
#include <vector>

#include "ggsim/errors.hpp"
#include "ggsim/numeric.hpp"
#include "ggsim/rng.hpp"
#include "ggsim/stats.hpp"

using namespace ggsim;

TEST_CASE("normal quantile and cdf agree") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  for (double x : {-3.5, -1.0, -0.1, 0.3, 1.7, 3.0, 4.2}) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
  }
  // The default level puts the two-sided threshold at exactly 3.
  CHECK(normal_quantile(1.0 - kDefaultZLevel / 2.0) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(normal_quantile(0.0), UsageError);
  CHECK_THROWS_AS(normal_quantile(1.0), UsageError);
}

TEST_CASE("z test on the same estimate passes with z = 0") {
  MCEstimate a{0.37, 0.002, 100, 100, 1};
  const TestVerdict v = z_equality_test(a, a);
  CHECK(v.statistic == 0.0);
  CHECK(v.pass);
}

TEST_CASE("z test separates the negative-control means") {
  MCEstimate a{0.68, 0.001, 1, 1000, 1};
  MCEstimate b{0.8933, 0.001, 1, 1000, 2};
  const TestVerdict v = z_equality_test(a, b);
  CHECK(v.statistic == doctest::Approx(-150.85).epsilon(0.005));
  CHECK_FALSE(v.pass);
  // Symmetric in its arguments.
  const TestVerdict w = z_equality_test(b, a);
  CHECK(w.statistic == doctest::Approx(-v.statistic));
  CHECK(w.pass == v.pass);
}

TEST_CASE("a difference of exactly threshold times the SE passes") {
  const double threshold =
      z_equality_test(MCEstimate{}, MCEstimate{}).threshold;
  MCEstimate a{0.0, 1.0, 1, 100, 1};
  MCEstimate b{threshold, 0.0, 1, 100, 2};
  CHECK(z_equality_test(a, b).statistic == -threshold);
  CHECK(z_equality_test(a, b).pass);
  b.mean = threshold * (1.0 + 1e-9);
  CHECK_FALSE(z_equality_test(a, b).pass);
}

TEST_CASE("zero combined SE with unequal means rejects, infinite flag") {
  MCEstimate a{0.68, 0.0, 1, 10, 1};
  MCEstimate b{0.8933, 0.0, 1, 10, 2};
  const TestVerdict v = z_equality_test(a, b);
  CHECK(v.infinite_statistic);
  CHECK(std::isinf(v.statistic));
  CHECK_FALSE(v.pass);
}

TEST_CASE("ks statistic on identical samples is zero") {
  std::vector<double> xs(80, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = std::sin(static_cast<double>(i));
  }
  const TestVerdict v = ks_two_sample(xs, xs, 0.01);
  CHECK(v.statistic == 0.0);
  CHECK(v.pass);
}

TEST_CASE("ks separates a point mass from a mixture") {
  // xs all 0.8; ys = 0.8 and 1.0 in ratio 1:2 -> sup gap 2/3 at 0.8.
  std::vector<double> xs(60, 0.8);
  std::vector<double> ys;
  for (int i = 0; i < 20; ++i) ys.push_back(0.8);
  for (int i = 0; i < 40; ++i) ys.push_back(1.0);
  const TestVerdict v = ks_two_sample(xs, ys, 0.01);
  CHECK(v.statistic == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_FALSE(v.pass);
  // Symmetry under swapping the samples.
  const TestVerdict w = ks_two_sample(ys, xs, 0.01);
  CHECK(w.statistic == v.statistic);
  CHECK(w.pass == v.pass);
}

TEST_CASE("ks calibration: same-law samples rarely reject") {
  int pass = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    RandomStream rng = RandomStream(500 + run).derive(0);
    std::vector<double> xs(200), ys(200);
    for (auto& x : xs) x = rng.uniform01();
    for (auto& y : ys) y = rng.uniform01();
    if (ks_two_sample(xs, ys, 0.01).pass) ++pass;
  }
  CHECK(pass >= runs * 98 / 100);
}

TEST_CASE("ks requires at least 50 points per sample") {
  std::vector<double> xs(49, 0.1), ys(60, 0.2);
  CHECK_THROWS_AS(ks_two_sample(xs, ys, 0.01), UsageError);
}

TEST_CASE("numeric helpers") {
  // Compensated summation keeps cancellation error at machine scale.
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) {
    xs.push_back(1e16);
    xs.push_back(1.0);
    xs.push_back(-1e16);
  }
  CHECK(compensated_sum(xs) == doctest::Approx(10000.0).epsilon(1e-12));

  // Shifted mean returns equal inputs bitwise.
  const double v = 0.12345678901234567;
  std::vector<double> eq(17, v);
  CHECK(shifted_mean(eq) == v);

  const MeanSE ms = mean_se(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
