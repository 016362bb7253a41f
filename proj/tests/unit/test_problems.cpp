// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "pidemc/error.hpp"
#include "pidemc/problems.hpp"
#include "pidemc/rng.hpp"

using namespace pidemc;

namespace {

std::vector<std::vector<double>> probe_points(int d, int n, std::uint64_t seed) {
  std::vector<std::vector<double>> pts;
  for (int p = 0; p < n; ++p) {
    RandomStream s(StreamKey{0, 0, static_cast<std::uint32_t>(p), seed});
    std::vector<double> x(static_cast<std::size_t>(d));
    for (double& v : x) v = 1.8 * s.uniform01() - 0.9;
    pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("polynomial: evaluation and derivatives") {
  const Polynomial p{{1.0, -2.0, 0.0, 3.0}};  // 1 - 2x + 3x^3
  CHECK(p(2.0) == doctest::Approx(21.0));
  CHECK(p.derivative()(2.0) == doctest::Approx(34.0));
  CHECK(p.derivative(2)(2.0) == doctest::Approx(36.0));
  CHECK(p.derivative(4)(2.0) == 0.0);
}

TEST_CASE("ball moments: closed forms") {
  // Indicator in 1-D: M_2 = int_{-delta}^{delta} z^2 dz = 2 delta^3 / 3.
  const double delta = 0.4;
  const auto k1 = KernelSpec::constant_indicator(1, delta);
  CHECK(ball_moment(k1, 2) == doctest::Approx(2 * std::pow(delta, 3) / 3).epsilon(1e-12));
  CHECK(ball_moment(k1, 0) == doctest::Approx(2 * delta).epsilon(1e-12));
  for (int d : {2, 3, 7}) {
    const auto k = KernelSpec::constant_indicator(d, delta);
    const double vol = std::pow(std::numbers::pi, d / 2.0) * std::pow(delta, d) /
                       std::tgamma(d / 2.0 + 1);
    CHECK(ball_moment(k, 2) == doctest::Approx(vol * delta * delta / (d + 2)).epsilon(1e-11));
    CHECK(ball_moment(k, 4) ==
          doctest::Approx(3 * vol * std::pow(delta, 4) / ((d + 2.0) * (d + 4.0))).epsilon(1e-11));
  }
  // Hypersingular 1-D: phi = C |z|^{-1-alpha}, M_2 = 2 C delta^{2-alpha} / (2 - alpha).
  const auto h = KernelSpec::hypersingular(1, delta, 1.5);
  const double C = normalization_constant(h);
  CHECK(ball_moment(h, 2) ==
        doctest::Approx(2 * C * std::pow(delta, 0.5) / 0.5).epsilon(1e-9));
  CHECK_THROWS_AS(ball_moment(h, 3), InvalidArgument);
}

TEST_CASE("nonlocal_apply_separable") {
  const auto k = KernelSpec::constant_indicator(2, 0.4);
  const std::vector<double> x{0.3, -0.5};
  // Linear functions are annihilated.
  CHECK(nonlocal_apply_separable(k, {Polynomial{{1.0, 2.0}}, Polynomial{{0.0, -3.0}}}, x) == 0.0);
  // Compare against direct quadrature over the disc for u = x1^4 + x2^3.
  const std::vector<Polynomial> polys{Polynomial{{0, 0, 0, 0, 1.0}}, Polynomial{{0, 0, 0, 1.0}}};
  const double got = nonlocal_apply_separable(k, polys, x);
  auto u = [&](double a, double b) { return polys[0](a) + polys[1](b); };
  const double delta = 0.4;
  // Trapezoid in theta is exact for trig polynomials, Gauss-Legendre in r for polynomials.
  const int nth = 64;
  const double ref = boost::math::quadrature::gauss<double, 20>::integrate(
      [&](double r) {
        double s = 0.0;
        for (int k = 0; k < nth; ++k) {
          const double th = 2 * std::numbers::pi * k / nth;
          s += u(x[0] + r * std::cos(th), x[1] + r * std::sin(th)) - u(x[0], x[1]);
        }
        return r * s * 2 * std::numbers::pi / nth;
      },
      0.0, delta);
  CHECK(got == doctest::Approx(ref).epsilon(1e-10));
  CHECK_THROWS_AS(nonlocal_apply_separable(k, {Polynomial{{1.0}}}, x), InvalidArgument);
}

TEST_CASE("manufactured sources: residual vanishes") {
  for (int d : {1, 2, 3}) {
    const auto spec = example1(d);
    for (const auto& x : probe_points(d, 8, 21)) {
      for (double t : {0.05, 0.4, 0.9}) {
        CHECK(std::abs(residual_oracle(spec, t, x)) < 1e-6);
      }
    }
  }
  for (int d : {1, 2, 10}) {
    const auto spec = example2(d);
    for (const auto& x : probe_points(d, 6, 22)) {
      for (double t : {0.05, 0.5, 0.95}) {
        CHECK(std::abs(residual_oracle(spec, t, x)) < 1e-6);
      }
    }
  }
}

TEST_CASE("residual oracle detects a wrong source") {
  auto spec = example1(2);
  auto base = spec.coeffs;
  auto c = std::make_shared<FunctionCoefficients>(2);
  c->set_drift([base](double t, std::span<const double> x, std::span<double> o) {
     base->drift(t, x, o);
   })
      .set_diffusion(DiffusionShape::Diagonal,
                     [base](double t, std::span<const double> x, std::span<double> o) {
                       base->diffusion(t, x, o);
                     })
      .set_forcing([base](double t, std::span<const double> x, double u) {
        return base->forcing(t, x, u) + 1e-3;
      });
  spec.coeffs = c;
  CHECK(std::abs(residual_oracle(spec, 0.5, std::vector<double>{0.1, 0.2}) + 1e-3) < 1e-6);
}

TEST_CASE("problem definitions") {
  const auto e1 = example1(3);
  CHECK(e1.kernel->family() == KernelFamily::ConstantIndicator);
  CHECK(e1.kernel->delta() == 0.4);
  const std::vector<double> x{0.5, -0.5, 0.25};
  CHECK(e1.coeffs->initial(x) == 0.0);
  CHECK(e1.coeffs->boundary(0.3, x) == e1.exact(0.3, x));
  const double p = std::pow(0.5, 5) - std::pow(0.5, 3) / 2 + -std::pow(0.5, 5) / 2 + std::pow(0.5, 3) / 3 +
                   std::pow(0.25, 5) / 3 - std::pow(0.25, 3) / 4;
  CHECK(e1.exact(0.3, x) == doctest::Approx(std::sin(3.0) * p));

  const auto e2 = example2(4);
  CHECK_FALSE(e2.kernel.has_value());
  const std::vector<double> y{0.1, 0.2, 0.3, 0.4};
  CHECK(e2.coeffs->initial(y) == doctest::Approx(std::exp(-0.3)));
  std::vector<double> s(4);
  e2.coeffs->diffusion(0.2, y, s);
  CHECK(s[0] == doctest::Approx(std::exp(-1.0) * std::cos(0.3)));
  CHECK(s[3] == doctest::Approx(std::exp(-1.0) * std::sin(0.4)));

  const auto e3 = example3(3, 1.5);
  CHECK_FALSE(e3.has_exact());
  CHECK(e3.kernel->family() == KernelFamily::Hypersingular);
  CHECK(e3.coeffs->forcing(0.0, y, 0.5) == doctest::Approx(std::pow(std::abs(std::sin(0.5)), 2.0 / 3)));
  std::vector<double> cz(3), z{0.1, 0.0, -0.1};
  e3.coeffs->jump(0.6, std::vector<double>{0.3, 0.6, 0.9}, z, cz);
  CHECK(cz[0] == doctest::Approx(std::exp(-0.1) + 0.6 * 0.3));
  CHECK(cz[2] == doctest::Approx(std::exp(0.1) + 0.2 * 0.9));
  CHECK_THROWS_AS(residual_oracle(e3, 0.5, std::vector<double>{0, 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(example3(2, 2.5), InvalidArgument);
  CHECK_THROWS_AS(make_problem("example9", 2, 1.0, 0.4), InvalidArgument);
  CHECK(with_dimension(e1, 5).dim == 5);
}

TEST_CASE("example1 forcing stays finite in the exterior collar") {
  // Exact u passes -1 near x_1 = 1.15 at this time.
  const auto e1 = example1(3);
  const double t = 26.0 / 64;
  double worst = 0.0;
  for (double a = 1.0; a <= 1.4; a += 1.0 / 1024) {
    const std::vector<double> x{a, 0.21, 0.07};
    worst = std::max(worst, std::abs(e1.coeffs->forcing(t, x, 0.0)));
  }
  CHECK(worst < 20.0);
  const std::vector<double> edge{1.0, 0.21, 0.07}, out{1.3, 0.21, 0.07};
  CHECK(e1.coeffs->forcing(t, out, 0.2) == e1.coeffs->forcing(t, edge, 0.2));
}
