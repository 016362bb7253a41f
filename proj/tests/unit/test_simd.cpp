// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pidemc/rng.hpp"
#include "pidemc/simd/kernels.hpp"
#include "pidemc/sparse_grid.hpp"

using namespace pidemc;

namespace {

bool have_avx2() { return simd::detected() == simd::Level::Avx2; }

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("dispatch") {
  CHECK(simd::name(simd::Level::Scalar) == "scalar");
  const auto before = simd::active();
  simd::force(simd::Level::Scalar);
  CHECK(simd::active() == simd::Level::Scalar);
  if (have_avx2()) {
    simd::force(simd::Level::Avx2);
    CHECK(simd::active() == simd::Level::Avx2);
  } else {
    CHECK_THROWS(simd::force(simd::Level::Avx2));
  }
  simd::force(before);
}

TEST_CASE("philox: avx2 matches scalar") {
  if (!have_avx2()) return;
  const std::size_t n = 1037;
  std::vector<std::uint32_t> c[4], a[4], b[4];
  RandomStream s(make_key(0, 0, 0, 1));
  for (int k = 0; k < 4; ++k) {
    c[k].resize(n);
    a[k].resize(n);
    b[k].resize(n);
    for (auto& v : c[k]) v = s.next_words()[0];
  }
  const philox::Key key{0xdeadbeefu, 0x12345678u};
  simd::kernels(simd::Level::Scalar).philox(key, c[0].data(), c[1].data(), c[2].data(), c[3].data(),
                                            a[0].data(), a[1].data(), a[2].data(), a[3].data(), n);
  simd::kernels(simd::Level::Avx2).philox(key, c[0].data(), c[1].data(), c[2].data(), c[3].data(),
                                          b[0].data(), b[1].data(), b[2].data(), b[3].data(), n);
  for (int k = 0; k < 4; ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("normal quantile: avx2 matches scalar bit for bit") {
  if (!have_avx2()) return;
  std::vector<double> u;
  RandomStream s(make_key(0, 0, 0, 2));
  for (int i = 0; i < 100003; ++i) u.push_back(s.uniform_open());
  for (double edge : {0.075, 0.925, 0.5, 1e-300, 1 - 1e-16, 0.5 - 0.425, 0.5 + 0.425}) u.push_back(edge);
  std::vector<double> a(u.size()), b(u.size());
  simd::kernels(simd::Level::Scalar).normal_quantile(u.data(), a.data(), u.size());
  simd::kernels(simd::Level::Avx2).normal_quantile(u.data(), b.data(), u.size());
  CHECK(bit_equal(a, b));
}

TEST_CASE("sparse eval: avx2 matches scalar bit for bit") {
  if (!have_avx2()) return;
  struct Case {
    int d, level;
  };
  for (Case c : {Case{1, 5}, Case{2, 4}, Case{3, 4}, Case{10, 3}, Case{100, 2}}) {
    const Box box = Box::symmetric(c.d, 1.3);
    const auto g = build_grid(c.d, c.level, box);
    std::vector<double> values(g->size());
    RandomStream s(make_key(1, 0, 0, 3));
    for (auto& v : values) v = s.standard_normal();
    // Random interior points, plus design points (exact node hits) mixed in.
    std::vector<double> pts;
    for (int p = 0; p < 301; ++p) {
      if (p % 3 == 0) {
        const auto x = g->point(static_cast<std::size_t>(p) % g->size());
        pts.insert(pts.end(), x.begin(), x.end());
      } else if (p % 3 == 1) {
        // Mixed: one coordinate on a node line, others random.
        for (int i = 0; i < c.d; ++i) pts.push_back(i == 0 ? 0.0 : 2.6 * s.uniform01() - 1.3);
      } else {
        for (int i = 0; i < c.d; ++i) pts.push_back(2.6 * s.uniform01() - 1.3);
      }
    }
    const std::size_t n = pts.size() / c.d;
    std::vector<double> a(n), b(n);
    simd::kernels(simd::Level::Scalar).sparse_eval(g->plan(), values.data(), pts.data(), n, a.data());
    simd::kernels(simd::Level::Avx2).sparse_eval(g->plan(), values.data(), pts.data(), n, b.data());
    CAPTURE(c.d);
    CHECK(bit_equal(a, b));
  }
}
