#include <doctest.h>

#include <cmath>
#include <vector>

#include "ggsim/rng.hpp"

using namespace ggsim;

TEST_CASE("identical (seed, path) yields identical sequences") {
  RandomStream a(7);
  RandomStream b(7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  RandomStream c = RandomStream(7).derive(2).derive(5);
  RandomStream d = RandomStream(7).derive(2).derive(5);
  for (int i = 0; i < 1000; ++i) CHECK(c.uniform01() == d.uniform01());
  CHECK(c.path_string() == "7/2/5");
}

TEST_CASE("derived children differ from each other and the parent") {
  RandomStream parent(42);
  int distinct = 0;
  RandomStream base = parent.derive(0);
  const std::uint64_t first = base.next_u64();
  for (std::uint32_t child = 1; child < 1000; ++child) {
    RandomStream s = parent.derive(child);
    if (s.next_u64() != first) ++distinct;
  }
  CHECK(distinct == 999);
}

TEST_CASE("sibling streams show no pairwise correlation") {
  RandomStream parent(123);
  RandomStream a = parent.derive(0);
  RandomStream b = parent.derive(1);
  const int n = 1'000'000;
  double sum_ab = 0, sum_a = 0, sum_b = 0, sum_a2 = 0, sum_b2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform01();
    const double y = b.uniform01();
    sum_ab += x * y;
    sum_a += x;
    sum_b += y;
    sum_a2 += x * x;
    sum_b2 += y * y;
  }
  const double cov = sum_ab / n - (sum_a / n) * (sum_b / n);
  const double var_a = sum_a2 / n - (sum_a / n) * (sum_a / n);
  const double var_b = sum_b2 / n - (sum_b / n) * (sum_b / n);
  CHECK(std::abs(cov / std::sqrt(var_a * var_b)) < 0.01);
}

TEST_CASE("uniform, sign and exponential moments") {
  RandomStream rng(9);
  const int n = 1'000'000;
  double su = 0, ss = 0, se = 0;
  for (int i = 0; i < n; ++i) su += rng.uniform01();
  for (int i = 0; i < n; ++i) ss += rng.sign();
  for (int i = 0; i < n; ++i) se += rng.exponential();
  CHECK(std::abs(su / n - 0.5) < 0.002);     // se ~ 0.00029
  CHECK(std::abs(ss / n) < 0.003);           // se ~ 0.001
  CHECK(std::abs(se / n - 1.0) < 0.005);     // se ~ 0.001
}
