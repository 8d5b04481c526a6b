#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "vmimo/rng.hpp"

using vmimo::RngStream;

TEST_CASE("same seed reproduces the exact sequence") {
  RngStream a(12345), b(12345);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform01 stays in [0,1)") {
  RngStream rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int covers the full inclusive range") {
  RngStream rng(11);
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 60000; ++i) hits[rng.uniform_int(0, 5)]++;
  for (int h : hits) CHECK(h > 9000);  // ~10000 each
  CHECK_THROWS(rng.uniform_int(3, 2));
}

TEST_CASE("normal moments") {
  RngStream rng(13);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("exponential mean is 1") {
  RngStream rng(17);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.exponential();
  CHECK(std::abs(sum / n - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("poisson zero mean and moment check") {
  RngStream rng(19);
  CHECK(rng.poisson(0.0) == 0);
  const int n = 20000;
  const double lambda = 9.0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(lambda));
  // mean of n draws ~ N(lambda, lambda/n)
  CHECK(std::abs(sum / n - lambda) < 3.0 * std::sqrt(lambda / n));
  CHECK_THROWS(rng.poisson(-1.0));
}

TEST_CASE("child streams are independent of parent consumption") {
  RngStream parent(23);
  const auto before = parent.child(5);
  parent.next_u64();
  parent.next_u64();
  auto after = parent.child(5);
  auto reference = before;
  for (int i = 0; i < 100; ++i) CHECK(reference.next_u64() == after.next_u64());

  auto c0 = parent.child(0);
  auto c1 = parent.child(1);
  CHECK(c0.next_u64() != c1.next_u64());
}

TEST_CASE("shuffle is a permutation") {
  RngStream rng(29);
  std::vector<int> values(50);
  std::iota(values.begin(), values.end(), 0);
  auto shuffled = values;
  rng.shuffle(shuffled);
  CHECK(shuffled != values);  // astronomically unlikely to be identity
  std::sort(shuffled.begin(), shuffled.end());
  CHECK(shuffled == values);
}
