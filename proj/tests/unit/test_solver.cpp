// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include <omp.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pidemc/error.hpp"
#include "pidemc/rng.hpp"
#include "pidemc/simd/kernels.hpp"
#include "pidemc/solver.hpp"

using namespace pidemc;

namespace {

ProblemSpec custom(int d, std::shared_ptr<FunctionCoefficients> c) {
  ProblemSpec p;
  p.name = "custom";
  p.dim = d;
  p.box = Box::symmetric(static_cast<std::size_t>(d));
  p.T = 1.0;
  p.coeffs = std::move(c);
  return p;
}

SolverConfig config(double dt, int m, int level, std::uint64_t seed = 1) {
  SolverConfig c;
  c.dt = dt;
  c.n_steps = steps_for(1.0, dt);
  c.m_paths = m;
  c.grid_level = level;
  c.master_seed = seed;
  return c;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("solver: config validation") {
  const auto p = example1(2);
  SolverConfig c = config(0.25, 10, 2);
  CHECK_NOTHROW(validate(c, p));
  c.n_steps = 3;
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  c = config(0.25, 0, 2);
  CHECK_THROWS_AS(validate(c, p), InvalidArgument);
  CHECK_THROWS_AS(steps_for(1.0, 0.3), InvalidArgument);
  CHECK(steps_for(1.0, 0.0078125) == 128);
}

TEST_CASE("solver: initialize") {
  auto c0 = std::make_shared<FunctionCoefficients>(3);
  const auto zero = initialize(custom(3, c0), config(0.5, 4, 3));
  for (double v : zero.node_values) CHECK(v == 0.0);

  auto c1 = std::make_shared<FunctionCoefficients>(3);
  c1->set_initial([](std::span<const double>) { return 1.0; });
  const auto one = initialize(custom(3, c1), config(0.5, 4, 3));
  for (std::uint32_t k = 0; k < 100; ++k) {
    RandomStream s(StreamKey{0, 0, k, 5});
    std::vector<double> x{2 * s.uniform01() - 1, 2 * s.uniform01() - 1, 2 * s.uniform01() - 1};
    CHECK(std::abs(one.interpolant->eval(x) - 1.0) < 1e-12);
  }
  const auto e1 = initialize(example1(2), config(0.5, 4, 3));
  for (double v : e1.node_values) CHECK(v == 0.0);

  auto bad = std::make_shared<FunctionCoefficients>(2);
  bad->set_initial([](std::span<const double>) { return std::nan(""); });
  CHECK_THROWS_AS(initialize(custom(2, bad), config(0.5, 4, 2)), NumericFailure);
}

TEST_CASE("solver: zero problem stays exactly zero") {
  auto c = std::make_shared<FunctionCoefficients>(2);
  c->set_diffusion(DiffusionShape::Diagonal,
                   [](double, std::span<const double>, std::span<double> o) { o[0] = o[1] = 0.4; });
  auto p = custom(2, c);
  p.kernel = KernelSpec::hypersingular(2, 0.4, 1.0);
  const auto snaps = solve(p, config(0.25, 300, 3));
  REQUIRE(snaps.size() == 5);
  for (const auto& s : snaps) {
    for (double v : s.node_values) CHECK(v == 0.0);
  }
  CHECK(snaps.back().time == 1.0);
}

TEST_CASE("solver: constant forcing gives 1 + dt exactly") {
  auto c = std::make_shared<FunctionCoefficients>(2);
  c->set_initial([](std::span<const double>) { return 1.0; })
      .set_forcing([](double, std::span<const double>, double) { return 1.0; })
      .set_boundary([](double t, std::span<const double>) { return 1.0 + t; });
  const auto p = custom(2, c);
  const auto cfg = config(0.125, 17, 3);
  const auto s0 = initialize(p, cfg);
  const auto s1 = advance_step(p, cfg, s0, StreamKey{1, 0, 0, cfg.master_seed});
  CHECK(s1.step_index == 1);
  for (double v : s1.node_values) CHECK(v == 1.125);
}

TEST_CASE("solver: time-only forcing is a left Riemann sum") {
  auto c = std::make_shared<FunctionCoefficients>(2);
  c->set_forcing([](double t, std::span<const double>, double) { return t; })
      .set_boundary([](double t, std::span<const double>) { return 0.5 * t * t; });
  const auto p = custom(2, c);
  const double dt = 1.0 / 16;
  const auto snaps = solve(p, config(dt, 3, 3));
  const auto& fin = snaps.back();
  const auto& design = fin.interpolant->design();
  for (std::size_t l = 0; l < design.size(); ++l) {
    if (!in_domain(p.box, design.point(l))) continue;
    CHECK(std::abs(fin.node_values[l] - (1.0 - dt) / 2) < 1e-13);
    CHECK(std::abs(fin.node_values[l] - 0.5) == doctest::Approx(dt / 2));
  }
}

TEST_CASE("solver: linear drift transports a linear profile") {
  auto c = std::make_shared<FunctionCoefficients>(2);
  auto u0 = [](std::span<const double> x) { return 1.0 + 2.0 * x[0] - x[1]; };
  c->set_drift([](double, std::span<const double>, std::span<double> o) {
     o[0] = 0.1;
     o[1] = -0.2;
   })
      .set_initial(u0);
  const auto p = custom(2, c);
  const auto cfg = config(0.1, 5, 3);
  const auto s1 = advance_step(p, cfg, initialize(p, cfg), StreamKey{1, 0, 0, 1});
  const auto& design = s1.interpolant->design();
  int checked = 0;
  for (std::size_t l = 0; l < design.size(); ++l) {
    const auto x = design.point(l);
    std::vector<double> y{x[0] + 0.01, x[1] - 0.02};
    if (!in_domain(p.box, x) || !in_domain(p.box, y)) continue;
    CHECK(s1.node_values[l] == doctest::Approx(u0(y)).epsilon(1e-14));
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("solver: failures name step, node and path") {
  auto c = std::make_shared<FunctionCoefficients>(2);
  c->set_forcing([](double, std::span<const double> x, double) {
    return x[0] > 0.5 ? std::nan("") : 0.0;
  });
  const auto p = custom(2, c);
  const auto cfg = config(0.5, 300, 3);
  try {
    solve(p, cfg);
    FAIL("expected NumericFailure");
  } catch (const NumericFailure& e) {
    const std::string msg = e.what();
    CHECK(msg.find("step 1") != std::string::npos);
    CHECK(msg.find("node") != std::string::npos);
    CHECK(msg.find("path 0") != std::string::npos);
  }
}

TEST_CASE("solver: retention window") {
  auto cfg = config(0.125, 5, 2);
  cfg.retain_last = 2;
  const auto snaps = solve(example1(2), cfg);
  REQUIRE(snaps.size() == 9);
  for (std::size_t i = 0; i < 7; ++i) CHECK_FALSE(snaps[i].retained());
  CHECK(snaps[7].retained());
  CHECK(snaps[8].retained());
  CHECK(snaps[3].step_index == 3);
}

TEST_CASE("solver: statistics") {
  StepStats total;
  const auto cfg = config(0.25, 1000, 3);
  solve(example1(2), cfg, &total);
  CHECK(total.boundary_nodes == 4 * 8);
  CHECK(total.paths == 4u * 5u * 1000u);
  CHECK(total.exits > 0);
  CHECK(total.overshoot == 0);  // diffusion is tiny, jumps are bounded by delta
  CHECK(total.jumps > 0);
}

TEST_CASE("solver: example 1 tracks the exact solution") {
  const auto p = example1(2);
  const auto snaps = solve(p, config(1.0 / 64, 4000, 4, 3));
  const auto& fin = snaps.back();
  const auto& design = fin.interpolant->design();
  double worst = 0.0;
  for (std::size_t l = 0; l < design.size(); ++l) {
    worst = std::max(worst, std::abs(fin.node_values[l] - p.exact(1.0, design.point(l))));
  }
  CHECK(worst < 0.03);
}

TEST_CASE("solver: determinism across threads, SIMD levels and runs") {
  const auto before_simd = simd::active();
  const int before_threads = omp_get_max_threads();
  for (const auto& p : {example1(2), example3(3, 1.5)}) {
    auto cfg = config(0.125, 700, 3, 42);
    omp_set_num_threads(1);
    const auto a = solve(p, cfg).back().node_values;
    omp_set_num_threads(8);
    const auto b = solve(p, cfg).back().node_values;
    const auto b2 = solve(p, cfg).back().node_values;
    CHECK(bit_equal(a, b));
    CHECK(bit_equal(b, b2));
    simd::force(simd::Level::Scalar);
    const auto s = solve(p, cfg).back().node_values;
    CHECK(bit_equal(a, s));
    simd::force(before_simd);
    if (p.name == "example1") {
      cfg.master_seed = 43;
      CHECK_FALSE(bit_equal(a, solve(p, cfg).back().node_values));
    }
  }
  omp_set_num_threads(before_threads);
}
