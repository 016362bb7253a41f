// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pidemc/error.hpp"
#include "pidemc/kernels.hpp"
#include "pidemc/specfun.hpp"

using namespace pidemc;

namespace {

std::vector<KernelSpec> all_families(int d, double delta) {
  return {KernelSpec::constant_indicator(d, delta), KernelSpec::hypersingular(d, delta, 0.5),
          KernelSpec::hypersingular(d, delta, 1.5), KernelSpec::tempered(d, delta, 1.0, 1.0),
          KernelSpec::gaussian(d, delta, 1.0)};
}

// omega_d * int_0^delta r^{d-1+k} phi(r) dr, integrand built in log space.
double radial_moment(const KernelSpec& spec, int k) {
  const int d = spec.dimension();
  const double log_omega = std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) -
                           std::lgamma(0.5 * d);
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    return std::exp(log_omega + log_kernel_value(spec, r) + (d - 1 + k) * std::log(r));
  };
  return oracle::integrate_singular(f, 0.0, spec.delta());
}

}  // namespace

TEST_CASE("KernelSpec validation") {
  CHECK_THROWS_AS(KernelSpec::hypersingular(2, 0.4, 0.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::hypersingular(2, 0.4, 2.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::hypersingular(2, -0.4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::tempered(2, 0.4, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::gaussian(2, 0.4, 0.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::constant_indicator(0, 0.4), InvalidArgument);
  CHECK(parse_kernel_family("tempered") == KernelFamily::Tempered);
  CHECK_THROWS_AS(parse_kernel_family("levy"), InvalidArgument);
}

TEST_CASE("normalization constants") {
  CHECK(normalization_constant(KernelSpec::hypersingular(2, 1.0, 1.0)) ==
        doctest::Approx(1.0 / (2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(normalization_constant(KernelSpec::constant_indicator(3, 0.4)) == 1.0);
  // Tempered at 2 - alpha = 1: beta / (omega_d (1 - e^{-beta delta})).
  const double ct = normalization_constant(KernelSpec::tempered(2, 1.0, 1.0, 1.0));
  CHECK(ct == doctest::Approx(1.0 / (2 * std::numbers::pi * (1 - std::exp(-1.0)))).epsilon(1e-14));
  // Gaussian d = 2: 1 / (2 pi sigma^2 (1 - e^{-delta^2 / 2 sigma^2})).
  const double cg = normalization_constant(KernelSpec::gaussian(2, 1.0, 1.0));
  CHECK(cg == doctest::Approx(1.0 / (2 * std::numbers::pi * (1 - std::exp(-0.5)))).epsilon(1e-14));
}

TEST_CASE("second-moment and mass normalization by radial quadrature") {
  for (int d : {2, 10, 100}) {
    for (double delta : {0.1, 0.4, 1.0}) {
      CAPTURE(d);
      CAPTURE(delta);
      CHECK(std::abs(radial_moment(KernelSpec::hypersingular(d, delta, 0.5), 2) - 1.0) < 1e-8);
      CHECK(std::abs(radial_moment(KernelSpec::hypersingular(d, delta, 1.5), 2) - 1.0) < 1e-8);
      CHECK(std::abs(radial_moment(KernelSpec::tempered(d, delta, 1.0, 1.0), 2) - 1.0) < 1e-8);
      CHECK(std::abs(radial_moment(KernelSpec::gaussian(d, delta, 1.0), 0) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("jump intensity") {
  CHECK(jump_intensity(KernelSpec::hypersingular(5, 0.4, 1.0)) == 1.0);
  CHECK(jump_intensity(KernelSpec::gaussian(5, 0.4, 1.0)) == 1.0);
  CHECK(jump_intensity(KernelSpec::constant_indicator(2, 0.4)) ==
        doctest::Approx(std::numbers::pi * 0.16).epsilon(1e-14));
  CHECK(jump_intensity(KernelSpec::constant_indicator(3, 1.0)) ==
        doctest::Approx(4 * std::numbers::pi / 3).epsilon(1e-14));
  // Indicator intensity is its mass.
  const auto c = KernelSpec::constant_indicator(4, 0.7);
  CHECK(radial_moment(c, 0) == doctest::Approx(jump_intensity(c)).epsilon(1e-10));
}

TEST_CASE("sample_radius closed forms") {
  for (const auto& spec : all_families(3, 0.4)) {
    CHECK(sample_radius(spec, 0.0) == 0.0);
    CHECK(sample_radius(spec, 1.0) == spec.delta());
    CHECK_THROWS_AS(sample_radius(spec, -0.1), InvalidArgument);
    CHECK_THROWS_AS(sample_radius(spec, 1.1), InvalidArgument);
  }
  CHECK(sample_radius(KernelSpec::hypersingular(2, 0.4, 1.0), 0.25) ==
        doctest::Approx(0.1).epsilon(1e-15));
  {
    // Gaussian d = 2 inverts 1 - e^{-r^2/2} in closed form; also bisect the CDF.
    const auto g = KernelSpec::gaussian(2, 1.0, 1.0);
    const double xi = 0.5;
    const double closed = std::sqrt(-2 * std::log(1 - xi * (1 - std::exp(-0.5))));
    CHECK(std::abs(sample_radius(g, xi) - closed) < 1e-10);
    const double numeric = oracle::bisect(
        [](double r) { return (1 - std::exp(-r * r / 2)) / (1 - std::exp(-0.5)); }, xi, 0.0, 1.0);
    CHECK(std::abs(numeric - closed) < 1e-10);
  }
  {
    const auto t = KernelSpec::tempered(2, 1.0, 1.0, 1.0);
    const double closed = -std::log(1 - 0.5 * (1 - std::exp(-1.0)));
    CHECK(std::abs(sample_radius(t, 0.5) - closed) < 1e-12);
    // beta != 1 exercises the 1/beta factor: CDF is (1 - e^{-beta r}) / (1 - e^{-beta delta}).
    const auto t3 = KernelSpec::tempered(2, 1.0, 1.0, 3.0);
    const double closed3 = -std::log(1 - 0.5 * (1 - std::exp(-3.0))) / 3.0;
    CHECK(std::abs(sample_radius(t3, 0.5) - closed3) < 1e-12);
  }
}

TEST_CASE("radial_cdf") {
  CHECK(radial_cdf(KernelSpec::hypersingular(3, 1.0, 1.0), 0.25) == doctest::Approx(0.25));
  for (int d : {1, 2, 10, 100}) {
    for (const auto& spec : all_families(d, 0.4)) {
      CHECK(radial_cdf(spec, spec.delta()) == 1.0);
      CHECK(radial_cdf(spec, 0.0) == 0.0);
      CHECK_THROWS_AS(radial_cdf(spec, 0.5), InvalidArgument);
      double prev = 0.0;
      for (int k = 1; k <= 9; ++k) {
        const double xi = 0.1 * k;
        const double r = sample_radius(spec, xi);
        CAPTURE(d);
        CAPTURE(to_string(spec.family()));
        CAPTURE(xi);
        CHECK(std::abs(radial_cdf(spec, r) - xi) < 1e-10);
        CHECK(r > prev);
        prev = r;
      }
    }
  }
  // Tempered CDF against direct quadrature of its density r^{1-alpha} e^{-beta r}.
  const auto t = KernelSpec::tempered(3, 0.4, 0.5, 2.0);
  auto dens = [](double r) { return std::pow(r, 0.5) * std::exp(-2.0 * r); };
  const double total = oracle::integrate_singular(dens, 0.0, 0.4);
  const double part = oracle::integrate_singular(dens, 0.0, 0.13);
  CHECK(radial_cdf(t, 0.13) == doctest::Approx(part / total).epsilon(1e-12));
}

TEST_CASE("sampled radii follow the radial CDF (KS, 1e6 samples)") {
  const std::vector<KernelSpec> specs = {
      KernelSpec::hypersingular(3, 0.4, 0.5), KernelSpec::hypersingular(3, 0.4, 1.5),
      KernelSpec::tempered(3, 0.4, 1.0, 1.0), KernelSpec::gaussian(3, 0.4, 1.0)};
  for (const auto& spec : specs) {
    std::vector<double> r(1'000'000);
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = sample_jump(spec, make_key(0, 0, i, 17)).r;
    }
    // Analytic CDFs written out independently of radial_cdf.
    std::function<double(double)> cdf;
    if (spec.family() == KernelFamily::Hypersingular) {
      const double a = spec.alpha();
      cdf = [a](double x) { return std::pow(x / 0.4, 2 - a); };
    } else if (spec.family() == KernelFamily::Tempered) {
      cdf = [](double x) { return (1 - std::exp(-x)) / (1 - std::exp(-0.4)); };
    } else {
      cdf = [](double x) {
        return boost::math::gamma_p(1.5, x * x / 2) / boost::math::gamma_p(1.5, 0.08);
      };
    }
    CAPTURE(to_string(spec.family()));
    CHECK(oracle::ks_statistic(r, cdf) < 0.002);
  }
}

TEST_CASE("sample_direction") {
  int bins[36] = {};
  const int n = 1'000'000;
  double mean[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    const auto v = sample_direction(make_key(1, 0, static_cast<std::uint64_t>(i), 3), 2);
    CHECK_MESSAGE(std::abs(std::hypot(v[0], v[1]) - 1.0) < 1e-12, i);
    const double a = std::atan2(v[1], v[0]) + std::numbers::pi;
    bins[std::min(35, static_cast<int>(a / (2 * std::numbers::pi) * 36))]++;
    mean[0] += v[0];
    mean[1] += v[1];
  }
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - n / 36.0) * (b - n / 36.0) / (n / 36.0);
  CHECK(chi2 < 66.62);  // chi^2_{35}, 99.9%
  CHECK(std::abs(mean[0] / n) < 0.004);
  CHECK(std::abs(mean[1] / n) < 0.004);
  for (int d : {1, 7, 100}) {
    const auto v = sample_direction(make_key(0, 0, 0, 9), d);
    double s = 0;
    for (double x : v) s += x * x;
    CHECK(std::abs(std::sqrt(s) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(sample_direction(make_key(0, 0, 0, 0), 0), InvalidArgument);
}

TEST_CASE("sample_jump moments and rotational symmetry") {
  const auto g = KernelSpec::gaussian(3, 0.4, 1.0);
  const int n = 1'000'000;
  double m2 = 0.0, c2[3] = {0, 0, 0}, c1[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const auto s = sample_jump(g, make_key(2, 1, static_cast<std::uint64_t>(i), 5));
    CHECK_MESSAGE(s.r <= 0.4, i);
    double zz = 0;
    for (int k = 0; k < 3; ++k) {
      CHECK_MESSAGE(s.z[k] == s.r * s.direction[k], i);
      zz += s.z[k] * s.z[k];
      c1[k] += s.z[k];
      c2[k] += s.z[k] * s.z[k];
    }
    m2 += zz;
  }
  // E|z|^2 under psi = phi (lambda = 1): omega_d int r^{d+1} phi dr.
  const double expect = radial_moment(g, 2);
  CHECK(m2 / n == doctest::Approx(expect).epsilon(0.01));
  for (int k = 0; k < 3; ++k) {
    CHECK(c2[k] / n == doctest::Approx(expect / 3).epsilon(0.01));
    CHECK(std::abs(c1[k] / n) < 0.002);
  }
}
