// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pidemc/error.hpp"
#include "pidemc/rng.hpp"
#include "pidemc/simd/kernels.hpp"

using namespace pidemc;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Published Random123 test vectors.
  using philox::Block;
  CHECK(philox::philox4x32({0, 0, 0, 0}, {0, 0}) ==
        Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                           {0xffffffffu, 0xffffffffu}) ==
        Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                           {0xa4093822u, 0x299f31d0u}) ==
        Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniform01 is deterministic and in range") {
  const auto key = make_key(3, 7, 11, 42);
  const auto a = uniform01(key, 1000);
  const auto b = uniform01(key, 1000);
  CHECK(a == b);
  const auto u = uniform01(make_key(0, 0, 0, 1), 1'000'000);
  double sum = 0.0;
  bool in_range = true;
  for (double v : u) {
    sum += v;
    in_range = in_range && v >= 0.0 && v < 1.0;
  }
  CHECK(in_range);
  // 3 sigma/sqrt(n), sigma^2 = 1/12
  CHECK(std::abs(sum / u.size() - 0.5) < 0.002);
}

TEST_CASE("RandomStream resumes at any draw position") {
  const auto key = make_key(1, 2, 3, 99);
  const auto all = uniform01(key, 9);
  RandomStream s(key, 5);
  for (std::size_t i = 5; i < 9; ++i) CHECK(s.uniform01() == all[i]);
}

TEST_CASE("unit interval maps hit their edges correctly") {
  CHECK(to_unit_closed_open(0, 0) == 0.0);
  CHECK(to_unit_closed_open(0xffffffffu, 0xffffffffu) < 1.0);
  CHECK(to_unit_open(0, 0) > 0.0);
  CHECK(to_unit_open(0xffffffffu, 0xffffffffu) < 1.0);
}

TEST_CASE("standard_normal moments and KS") {
  CHECK_THROWS_AS(standard_normal(make_key(0, 0, 0, 0), 0), InvalidArgument);
  const auto key = make_key(0, 0, 0, 2024);
  CHECK(standard_normal(key, 8) == standard_normal(key, 8));
  const auto z = standard_normal(key, 1'000'000);
  double s1 = 0.0, s2 = 0.0;
  for (double v : z) {
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / z.size();
  const double var = s2 / z.size() - mean * mean;
  CHECK(std::abs(mean) < 0.004);
  CHECK(std::abs(var - 1.0) < 0.01);
  CHECK(oracle::ks_statistic(z, oracle::phi_cdf) < 0.002);
}

TEST_CASE("poisson_count") {
  CHECK_THROWS_AS(poisson_count(make_key(0, 0, 0, 0), -1.0), InvalidArgument);
  CHECK_THROWS_AS(poisson_count(make_key(0, 0, 0, 0), INFINITY), InvalidArgument);
  int zeros = 0, two_plus = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const auto key = make_key(0, 0, static_cast<std::uint64_t>(i), 5);
    CHECK_EQ(poisson_count(key, 0.0), 0u);
    const auto k = poisson_count(key, 0.01);
    zeros += (k == 0);
    two_plus += (k >= 2);
  }
  CHECK(std::abs(zeros / double(n) - std::exp(-0.01)) < 0.001);
  CHECK(two_plus / double(n) < 1e-3);
}

TEST_CASE("poisson_from_uniform matches the Poisson pmf") {
  // P(N <= k) thresholds, exact from the pmf.
  const double mean = 3.5;
  double cdf = 0.0, p = std::exp(-mean);
  for (unsigned k = 0; k < 12; ++k) {
    cdf += p;
    CHECK(poisson_from_uniform(mean, cdf * (1 - 1e-12)) == k);
    CHECK(poisson_from_uniform(mean, std::min(cdf * (1 + 1e-12), 1 - 1e-16)) == k + 1);
    p *= mean / (k + 1);
  }
  // Underflowing exp(-mean) still yields a sensible count.
  const auto big = poisson_from_uniform(1e4, 0.5);
  CHECK(big >= 9990u);
  CHECK(big <= 10010u);
}

TEST_CASE("adjacent streams are uncorrelated") {
  const int n = 100'000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double a = uniform01(make_key(4, 9, static_cast<std::uint64_t>(i), 7), 1)[0];
    const double b = uniform01(make_key(4, 9, static_cast<std::uint64_t>(i) + 1, 7), 1)[0];
    sa += a;
    sb += b;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("make_key rejects indices wider than 32 bits") {
  CHECK_THROWS_AS(make_key(1ull << 32, 0, 0, 0), InvalidArgument);
  CHECK_NOTHROW(make_key(0xffffffffull, 0, 0, 0));
}
