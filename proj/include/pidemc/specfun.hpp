// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Gamma-family special functions used by the radial jump samplers.
//
// Everything is templated on the floating-point type. The solver only uses
// double; long double is available for checks whose conditioning exceeds
// what a 53-bit mantissa can resolve (e.g. inverting gamma(s, x) deep in the
// upper tail where gamma(s, x) is within 1e-10 of Gamma(s)).
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <string>

#include "pidemc/error.hpp"

namespace pidemc::specfun {

namespace detail {

template <std::floating_point Real>
constexpr Real kTiny = std::numeric_limits<Real>::min() / std::numeric_limits<Real>::epsilon();

/// Series or continued-fraction evaluation of the incomplete gamma pieces.
///
/// With prefactor = s ln x - x - ln Gamma(s):
///   x < s + 1:  P = exp(prefactor) * tail   (power series)
///   otherwise:  Q = exp(prefactor) * tail   (Lentz continued fraction)
template <std::floating_point Real>
struct GammaParts {
  Real log_prefactor;
  Real tail;
  bool series;
};

template <std::floating_point Real>
GammaParts<Real> gamma_parts(Real s, Real x) {
  constexpr Real eps = std::numeric_limits<Real>::epsilon();
  const Real log_prefactor = s * std::log(x) - x - std::lgamma(s);
  if (x < s + 1) {
    Real ap = s;
    Real term = 1 / s;
    Real sum = term;
    for (int n = 0; n < 100000; ++n) {
      ap += 1;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * eps) break;
    }
    return {log_prefactor, sum, true};
  }
  Real b = x + 1 - s;
  Real c = 1 / kTiny<Real>;
  Real d = 1 / b;
  Real h = d;
  for (int i = 1; i < 100000; ++i) {
    const Real an = -i * (i - s);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < kTiny<Real>) d = kTiny<Real>;
    c = b + an / c;
    if (std::fabs(c) < kTiny<Real>) c = kTiny<Real>;
    d = 1 / d;
    const Real del = d * c;
    h *= del;
    if (std::fabs(del - 1) < eps) break;
  }
  return {log_prefactor, h, false};
}

template <std::floating_point Real>
void check_gamma_args(Real s, Real x, const char* where) {
  if (!(s > 0) || !std::isfinite(s) || !(x >= 0) || std::isnan(x)) {
    pidemc::detail::throw_invalid(std::string(where) +
                                  ": requires s > 0 and x >= 0");
  }
}

}  // namespace detail

/// Surface area of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
template <std::floating_point Real = double>
Real omega_d(int d) {
  if (d <= 0) pidemc::detail::throw_invalid("omega_d: d must be >= 1");
  const Real half = Real(d) / 2;
  const Real pi = std::numbers::pi_v<Real>;
  if (d <= 300) return 2 * std::pow(pi, half) / std::tgamma(half);
  return std::exp(std::log(Real(2)) + half * std::log(pi) - std::lgamma(half));
}

template <std::floating_point Real = double>
Real log_omega_d(int d) {
  if (d <= 0) pidemc::detail::throw_invalid("omega_d: d must be >= 1");
  const Real half = Real(d) / 2;
  return std::log(Real(2)) + half * std::log(std::numbers::pi_v<Real>) -
         std::lgamma(half);
}

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
template <std::floating_point Real>
Real regularized_lower_gamma(Real s, Real x) {
  detail::check_gamma_args(s, x, "regularized_lower_gamma");
  if (x == 0) return 0;
  if (std::isinf(x)) return 1;
  const auto parts = detail::gamma_parts(s, x);
  const Real scaled = std::exp(parts.log_prefactor) * parts.tail;
  return parts.series ? scaled : 1 - scaled;
}

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
template <std::floating_point Real>
Real regularized_upper_gamma(Real s, Real x) {
  detail::check_gamma_args(s, x, "regularized_upper_gamma");
  if (x == 0) return 1;
  if (std::isinf(x)) return 0;
  const auto parts = detail::gamma_parts(s, x);
  const Real scaled = std::exp(parts.log_prefactor) * parts.tail;
  return parts.series ? 1 - scaled : scaled;
}

/// ln P(s, x); stays finite where P itself underflows (large s, small x).
template <std::floating_point Real>
Real log_regularized_lower_gamma(Real s, Real x) {
  detail::check_gamma_args(s, x, "log_regularized_lower_gamma");
  if (x == 0) return -std::numeric_limits<Real>::infinity();
  if (std::isinf(x)) return 0;
  const auto parts = detail::gamma_parts(s, x);
  if (parts.series) return parts.log_prefactor + std::log(parts.tail);
  return std::log1p(-std::exp(parts.log_prefactor) * parts.tail);
}

template <std::floating_point Real>
Real log_regularized_upper_gamma(Real s, Real x) {
  detail::check_gamma_args(s, x, "log_regularized_upper_gamma");
  if (x == 0) return 0;
  if (std::isinf(x)) return -std::numeric_limits<Real>::infinity();
  const auto parts = detail::gamma_parts(s, x);
  if (!parts.series) return parts.log_prefactor + std::log(parts.tail);
  return std::log1p(-std::exp(parts.log_prefactor) * parts.tail);
}

/// Lower incomplete gamma gamma(s, x) = int_0^x t^{s-1} e^{-t} dt.
template <std::floating_point Real>
Real lower_incomplete_gamma(Real s, Real x) {
  detail::check_gamma_args(s, x, "lower_incomplete_gamma");
  if (x == 0) return 0;
  const Real gamma_s = std::tgamma(s);
  if (std::isfinite(gamma_s)) return gamma_s * regularized_lower_gamma(s, x);
  return std::exp(std::lgamma(s) + log_regularized_lower_gamma(s, x));
}

namespace detail {

// Central-region rational approximation of AS 241, highest degree first.
// Shared with the vectorized quantile kernel, which must match bit for bit.
inline constexpr double kCentralSplit = 0.425;
inline constexpr double kCentralShift = 0.180625;
inline constexpr double kCentralNum[8] = {
    2509.0809287301226727, 33430.575583588128105, 67265.770927008700853,
    45921.953931549871457, 13731.693765509461125, 1971.5909503065514427,
    133.14166789178437745, 3.387132872796366608};
inline constexpr double kCentralDen[8] = {
    5226.495278852545925, 28729.085735721942674, 39307.89580009271061,
    21213.794301586595867, 5394.1960214247511077, 687.1870074920579083,
    42.313330701600911252, 1.0};

}  // namespace detail

/// Standard normal quantile (Wichura, AS 241, PPND16). Relative accuracy
/// about 1e-16 on (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    pidemc::detail::throw_invalid("normal_quantile: p must lie in [0, 1]");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= detail::kCentralSplit) {
    const double r = detail::kCentralShift - q * q;
    double num = detail::kCentralNum[0];
    double den = detail::kCentralDen[0];
    for (int k = 1; k < 8; ++k) {
      num = num * r + detail::kCentralNum[k];
      den = den * r + detail::kCentralDen[k];
    }
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace detail {

/// Solve for x > 0 given either ln P(s, x) = target (lower side) or
/// ln Q(s, x) = target (upper side). Newton in u = ln x, safeguarded by a
/// bracket that is widened geometrically until the root is enclosed.
template <std::floating_point Real>
Real solve_incomplete_gamma(Real s, Real target, bool lower_side, Real x0) {
  constexpr Real tol = 64 * std::numeric_limits<Real>::epsilon();
  const Real inf = std::numeric_limits<Real>::infinity();
  // F(u) is increasing in u on both sides.
  auto residual = [&](Real u, Real& slope) {
    const Real x = std::exp(u);
    const auto parts = gamma_parts(s, x);
    Real log_p, log_q;
    const Real scaled = std::exp(parts.log_prefactor) * parts.tail;
    if (parts.series) {
      log_p = parts.log_prefactor + std::log(parts.tail);
      log_q = std::log1p(-scaled);
    } else {
      log_q = parts.log_prefactor + std::log(parts.tail);
      log_p = std::log1p(-scaled);
    }
    if (lower_side) {
      slope = std::exp(parts.log_prefactor - log_p);
      return log_p - target;
    }
    slope = std::exp(parts.log_prefactor - log_q);
    return target - log_q;
  };

  Real lo = -inf, hi = inf;
  Real u = std::log(x0);
  for (int iter = 0; iter < 400; ++iter) {
    Real slope;
    const Real f = residual(u, slope);
    if (f == 0) return std::exp(u);
    if (f < 0) lo = u; else hi = u;
    Real next = u - f / slope;
    const bool usable = std::isfinite(next) && next > lo && next < hi;
    if (!usable) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else if (std::isfinite(lo)) {
        next = lo + std::max<Real>(1, std::fabs(lo));
      } else {
        next = hi - std::max<Real>(1, std::fabs(hi));
      }
    }
    const Real step = next - u;
    u = next;
    if (std::fabs(step) <= tol * std::max<Real>(1, std::fabs(u)) ||
        (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= tol * std::max<Real>(1, std::fabs(u)))) {
      return std::exp(u);
    }
  }
  throw NumericFailure("inverse incomplete gamma: no convergence for s=" +
                       std::to_string(static_cast<double>(s)));
}

template <std::floating_point Real>
Real initial_guess(Real s, Real log_p) {
  // Small-x asymptote P ~ x^s / Gamma(s + 1).
  const Real small_x = std::exp((log_p + std::lgamma(s + 1)) / s);
  const double p = std::exp(static_cast<double>(log_p));
  if (p <= 0.0 || p >= 1.0) return small_x > 0 ? small_x : Real(1);
  // Wilson-Hilferty cube-root normal approximation.
  const Real z = static_cast<Real>(normal_quantile(p));
  const Real w = 1 - 1 / (9 * s) + z / (3 * std::sqrt(s));
  const Real wh = s * w * w * w;
  if (!(wh > 0) || !std::isfinite(wh)) return small_x > 0 ? small_x : Real(1);
  if (p < 0.05 && small_x > 0 && small_x < wh) return small_x;
  return wh;
}

}  // namespace detail

/// x such that ln P(s, x) = log_p, for log_p in (-inf, 0).
template <std::floating_point Real>
Real inverse_regularized_lower_gamma_log(Real s, Real log_p) {
  if (!(s > 0) || std::isnan(log_p) || log_p > 0) {
    pidemc::detail::throw_invalid(
        "inverse_regularized_lower_gamma: requires s > 0 and p in [0, 1)");
  }
  if (std::isinf(log_p)) return 0;
  if (log_p == 0) {
    pidemc::detail::throw_invalid(
        "inverse_regularized_lower_gamma: p = 1 has no finite preimage");
  }
  const Real x0 = detail::initial_guess(s, log_p);
  if (log_p <= -std::numbers::ln2_v<Real>) {
    return detail::solve_incomplete_gamma(s, log_p, true, x0);
  }
  const Real log_q = std::log(-std::expm1(log_p));
  return detail::solve_incomplete_gamma(s, log_q, false, x0);
}

/// x such that P(s, x) = p, p in [0, 1).
template <std::floating_point Real>
Real inverse_regularized_lower_gamma(Real s, Real p) {
  if (!(s > 0) || !(p >= 0 && p < 1)) {
    pidemc::detail::throw_invalid(
        "inverse_regularized_lower_gamma: requires s > 0 and p in [0, 1)");
  }
  if (p == 0) return 0;
  const Real x0 = detail::initial_guess(s, std::log(p));
  if (p <= Real(0.5)) {
    return detail::solve_incomplete_gamma(s, std::log(p), true, x0);
  }
  return detail::solve_incomplete_gamma(s, std::log1p(-p), false, x0);
}

/// x such that gamma(s, x) = y, y in [0, Gamma(s)).
template <std::floating_point Real>
Real inverse_lower_incomplete_gamma(Real s, Real y) {
  if (!(s > 0) || !std::isfinite(s)) {
    pidemc::detail::throw_invalid("inverse_lower_incomplete_gamma: s must be > 0");
  }
  const Real gamma_s = std::tgamma(s);
  if (!(y >= 0) || !(y < gamma_s)) {
    pidemc::detail::throw_invalid(
        "inverse_lower_incomplete_gamma: y must lie in [0, Gamma(s))");
  }
  if (y == 0) return 0;
  if (std::isfinite(gamma_s)) return inverse_regularized_lower_gamma(s, y / gamma_s);
  return inverse_regularized_lower_gamma_log(s, std::log(y) - std::lgamma(s));
}

}  // namespace pidemc::specfun
