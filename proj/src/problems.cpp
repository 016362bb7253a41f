// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/problems.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pidemc/error.hpp"
#include "pidemc/specfun.hpp"

namespace pidemc {

namespace {

constexpr double kPi = std::numbers::pi;

double ball_volume(int d, double delta) {
  return std::exp(0.5 * d * std::log(kPi) + d * std::log(delta) - std::lgamma(0.5 * d + 1.0));
}

// Example 1 building blocks, j is 1-based.
double p1(double x, int j) { return std::pow(x, 5) / j - std::pow(x, 3) / (j + 1); }
double p1_d1(double x, int j) { return 5 * std::pow(x, 4) / j - 3 * x * x / (j + 1); }
double p1_d2(double x, int j) { return 20 * std::pow(x, 3) / j - 6 * x / (j + 1); }
double p1_d4(double x, int j) { return 120 * x / j; }

double sq_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

double Polynomial::operator()(double x) const {
  double r = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * x + *it;
  return r;
}

Polynomial Polynomial::derivative(int order) const {
  Polynomial p = *this;
  for (int o = 0; o < order; ++o) {
    if (p.coeffs.size() <= 1) return Polynomial{{0.0}};
    std::vector<double> c(p.coeffs.size() - 1);
    for (std::size_t k = 1; k < p.coeffs.size(); ++k) c[k - 1] = p.coeffs[k] * static_cast<double>(k);
    p.coeffs = std::move(c);
  }
  return p;
}

ProblemSpec example1(int d, double delta) {
  if (d < 1) detail::throw_invalid("example1: d must be >= 1");
  ProblemSpec spec;
  spec.name = "example1";
  spec.dim = d;
  spec.box = Box::symmetric(static_cast<std::size_t>(d));
  spec.T = 1.0;
  spec.kernel = KernelSpec::constant_indicator(d, delta);
  spec.identity_jump = true;

  auto exact = [d](double t, std::span<const double> x) {
    double s = 0.0;
    for (int j = 1; j <= d; ++j) s += p1(x[j - 1], j);
    return std::sin(10 * t) * s;
  };
  spec.exact = exact;
  SeparableSolution sep;
  sep.time_factor = [](double t) { return std::sin(10 * t); };
  for (int j = 1; j <= d; ++j) {
    sep.terms.push_back(Polynomial{{0.0, 0.0, 0.0, -1.0 / (j + 1), 0.0, 1.0 / j}});
  }
  spec.separable = std::move(sep);

  // Ball moments of the indicator: M_2 = |B| delta^2 / (d + 2),
  // M_4 = 3 |B| delta^4 / ((d + 2)(d + 4)).
  const double vol = ball_volume(d, delta);
  const double m2 = vol * delta * delta / (d + 2);
  const double m4 = 3 * vol * std::pow(delta, 4) / ((d + 2.0) * (d + 4.0));

  auto drift_i = [](double t, double x) {
    return 0.1 * std::cos(2 * kPi * t) * (2 * std::pow(x, 7) - std::pow(x, 8));
  };
  auto sigma_i = [](double t, double x) {
    const double s = std::sin(kPi * x);
    return std::exp(-t) * s * s / 20.0;
  };
  // r = du/dt - L u - (1 - u)/(1 + u) for the exact u.
  // Exit points read r at their projection onto the closed box: further
  // out the exact u reaches -1 and r has a pole.
  auto source = [=](double t, std::span<const double> x) {
    const double s = std::sin(10 * t);
    double p = 0.0, local = 0.0, nonlocal = 0.0;
    for (int j = 1; j <= d; ++j) {
      const double xj = std::clamp(x[j - 1], -1.0, 1.0);
      const double sg = sigma_i(t, xj);
      p += p1(xj, j);
      local += 0.5 * sg * sg * p1_d2(xj, j) + drift_i(t, xj) * p1_d1(xj, j);
      nonlocal += p1_d2(xj, j) * m2 / 2 + p1_d4(xj, j) * m4 / 24;
    }
    const double u = s * p;
    return 10 * std::cos(10 * t) * p - s * (local + nonlocal) - (1 - u) / (1 + u);
  };

  auto c = std::make_shared<FunctionCoefficients>(d);
  c->set_drift([=](double t, std::span<const double> x, std::span<double> out) {
     for (std::size_t i = 0; i < x.size(); ++i) out[i] = drift_i(t, x[i]);
   })
      .set_diffusion(DiffusionShape::Diagonal,
                     [=](double t, std::span<const double> x, std::span<double> out) {
                       for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigma_i(t, x[i]);
                     })
      .set_forcing([=](double t, std::span<const double> x, double u) {
        return (1 - u) / (1 + u) + source(t, x);
      })
      .set_boundary(exact)
      .set_initial([=](std::span<const double> x) { return exact(0.0, x); });
  spec.coeffs = std::move(c);
  return spec;
}

ProblemSpec example2(int d) {
  if (d < 1) detail::throw_invalid("example2: d must be >= 1");
  ProblemSpec spec;
  spec.name = "example2";
  spec.dim = d;
  spec.box = Box::symmetric(static_cast<std::size_t>(d));
  spec.T = 1.0;

  auto exact = [](double t, std::span<const double> x) {
    return std::cos(t * t) * std::exp(-sq_norm(x));
  };
  spec.exact = exact;

  auto drift_i = [](double t, double x) { return std::sin(t) / (1 + t * t) * std::exp(-x * x); };
  // Diagonal: cos(x_i + x_{i+1}) for i < d, sin(x_d) last.
  auto sigma = [d](double t, std::span<const double> x, std::span<double> out) {
    const double a = std::exp(-5 * t);
    for (int i = 0; i + 1 < d; ++i) out[i] = a * std::cos(x[i] + x[i + 1]);
    out[d - 1] = a * std::sin(x[d - 1]);
  };
  auto source = [=](double t, std::span<const double> x) {
    const double e = std::exp(-sq_norm(x));
    const double u = std::cos(t * t) * e;
    std::vector<double> sg(static_cast<std::size_t>(d));
    sigma(t, x, sg);
    double local = 0.0;
    for (int i = 0; i < d; ++i) {
      const double xi = x[i];
      local += 0.5 * sg[i] * sg[i] * (4 * xi * xi - 2) * u + drift_i(t, xi) * (-2 * xi * u);
    }
    return -2 * t * std::sin(t * t) * e - local - std::exp(-2 * std::abs(u));
  };

  auto c = std::make_shared<FunctionCoefficients>(d);
  c->set_drift([=](double t, std::span<const double> x, std::span<double> out) {
     for (std::size_t i = 0; i < x.size(); ++i) out[i] = drift_i(t, x[i]);
   })
      .set_diffusion(DiffusionShape::Diagonal, sigma)
      .set_forcing([=](double t, std::span<const double> x, double u) {
        return std::exp(-2 * std::abs(u)) + source(t, x);
      })
      .set_boundary(exact)
      .set_initial([=](std::span<const double> x) { return exact(0.0, x); });
  spec.coeffs = std::move(c);
  return spec;
}

ProblemSpec example3(int d, double alpha, double delta) {
  if (d < 1) detail::throw_invalid("example3: d must be >= 1");
  if (!(alpha > 0.0 && alpha < 2.0)) detail::throw_invalid("example3: alpha must lie in (0, 2)");
  ProblemSpec spec;
  spec.name = "example3";
  spec.dim = d;
  spec.box = Box::symmetric(static_cast<std::size_t>(d));
  spec.T = 1.0;
  spec.kernel = KernelSpec::hypersingular(d, delta, alpha);

  auto c = std::make_shared<FunctionCoefficients>(d);
  c->set_drift([](double t, std::span<const double> x, std::span<double> out) {
     const double a = std::exp(-t * t);
     for (std::size_t i = 0; i < x.size(); ++i) {
       out[i] = a * std::log(3 + std::abs(x[i]) / (1 + t));
     }
   })
      .set_diffusion(DiffusionShape::Diagonal,
                     [d](double t, std::span<const double> x, std::span<double> out) {
                       const double a = std::cos(t) / (1 + 10 * t * t);
                       // k = 1 .. d-1: sin(x_k x_{k+1}^{k+1} / (k + 1)); last: cos(x_1 x_d).
                       for (int k = 1; k < d; ++k) {
                         out[k - 1] = a * std::sin(x[k - 1] * std::pow(x[k], k + 1) / (k + 1));
                       }
                       out[d - 1] = a * std::cos(x[0] * x[d - 1]);
                     })
      .set_jump([](double t, std::span<const double> x, std::span<const double> z,
                   std::span<double> out) {
        for (std::size_t k = 0; k < x.size(); ++k) {
          out[k] = std::exp(-z[k]) + t / static_cast<double>(k + 1) * x[k];
        }
      })
      .set_forcing([](double, std::span<const double>, double u) {
        const double s = std::sin(u);
        return std::cbrt(s * s);
      })
      .set_boundary([](double, std::span<const double>) { return 0.0; })
      .set_initial([](std::span<const double>) { return 0.0; });
  spec.coeffs = std::move(c);
  return spec;
}

ProblemSpec with_dimension(const ProblemSpec& spec, int d) {
  const double delta = spec.kernel ? spec.kernel->delta() : 0.4;
  if (spec.name == "example1") return example1(d, delta);
  if (spec.name == "example2") return example2(d);
  if (spec.name == "example3") return example3(d, spec.kernel->alpha(), delta);
  detail::throw_invalid("with_dimension: '" + spec.name + "' is not a built-in problem");
}

ProblemSpec make_problem(const std::string& name, int d, double alpha, double delta) {
  if (name == "example1") return example1(d, delta);
  if (name == "example2") return example2(d);
  if (name == "example3") return example3(d, alpha, delta);
  detail::throw_invalid("unknown problem '" + name + "' (expected example1|example2|example3)");
}

double ball_moment(const KernelSpec& kernel, int k) {
  if (k < 0 || k % 2 != 0) detail::throw_invalid("ball_moment: k must be even and >= 0");
  const int d = kernel.dimension();
  // E[theta_1^k] for theta uniform on the sphere.
  const double log_theta = std::lgamma(0.5 * d) + std::lgamma(0.5 * (k + 1)) -
                           0.5 * std::log(kPi) - std::lgamma(0.5 * (k + d));
  const double log_pre = specfun::log_omega_d(d) + log_theta;
  auto f = [&](double r) {
    if (!(r > 0.0)) return 0.0;
    return std::exp(log_pre + log_kernel_value(kernel, r) + (k + d - 1) * std::log(r));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, 0.0, kernel.delta());
}

double nonlocal_apply_separable(const KernelSpec& kernel, const std::vector<Polynomial>& polys,
                                std::span<const double> x) {
  if (polys.size() != x.size() || static_cast<int>(x.size()) != kernel.dimension()) {
    detail::throw_invalid("nonlocal_apply_separable: need one polynomial per dimension");
  }
  int max_deg = 0;
  for (const auto& p : polys) {
    for (double c : p.coeffs) {
      if (!std::isfinite(c)) detail::throw_invalid("nonlocal_apply_separable: non-finite coefficient");
    }
    max_deg = std::max(max_deg, p.degree());
  }
  double total = 0.0;
  double factorial = 1.0;
  for (int k = 1; k <= max_deg; ++k) {
    factorial *= k;
    if (k % 2 != 0) continue;
    const double mk = ball_moment(kernel, k);
    for (std::size_t j = 0; j < polys.size(); ++j) {
      if (polys[j].degree() < k) continue;
      total += polys[j].derivative(k)(x[j]) / factorial * mk;
    }
  }
  return total;
}

double residual_oracle(const ProblemSpec& spec, double t, std::span<const double> x) {
  if (!spec.has_exact()) detail::throw_invalid("residual_oracle: problem has no exact solution");
  if (spec.kernel && !(spec.separable && spec.identity_jump)) {
    detail::throw_invalid("residual_oracle: nonlocal term needs a separable solution with c = z");
  }
  const int d = spec.dim;
  const auto ud = static_cast<std::size_t>(d);
  const auto& u = spec.exact;
  std::vector<double> y(x.begin(), x.end());

  auto u_shift = [&](std::size_t i, double hi, std::size_t j, double hj) {
    y[i] += hi;
    y[j] += hj;
    const double v = u(t, y);
    y[i] = x[i];
    y[j] = x[j];
    return v;
  };
  // Richardson: (4 D(h/2) - D(h)) / 3 removes the h^2 term.
  auto first = [&](std::size_t i) {
    auto D = [&](double h) { return (u_shift(i, h, i, 0.0) - u_shift(i, -h, i, 0.0)) / (2 * h); };
    const double h = 1e-4;
    return (4 * D(h / 2) - D(h)) / 3;
  };
  const double u0 = u(t, x);
  auto second = [&](std::size_t i, std::size_t j) {
    auto S = [&](double h) {
      if (i == j) return (u_shift(i, h, i, 0.0) - 2 * u0 + u_shift(i, -h, i, 0.0)) / (h * h);
      return (u_shift(i, h, j, h) - u_shift(i, h, j, -h) - u_shift(i, -h, j, h) +
              u_shift(i, -h, j, -h)) / (4 * h * h);
    };
    const double h = 1e-3;
    return (4 * S(h / 2) - S(h)) / 3;
  };
  auto dt = [&]() {
    auto D = [&](double h) { return (u(t + h, x) - u(t - h, x)) / (2 * h); };
    const double h = 1e-4;
    return (4 * D(h / 2) - D(h)) / 3;
  };

  const CoefficientSet& c = *spec.coeffs;
  std::vector<double> mu(ud);
  c.drift(t, x, mu);
  double generator = 0.0;
  for (std::size_t i = 0; i < ud; ++i) generator += mu[i] * first(i);

  if (c.diffusion_shape() == DiffusionShape::Diagonal) {
    std::vector<double> s(ud);
    c.diffusion(t, x, s);
    for (std::size_t i = 0; i < ud; ++i) {
      if (s[i] != 0.0) generator += 0.5 * s[i] * s[i] * second(i, i);
    }
  } else {
    std::vector<double> s(ud * ud);
    c.diffusion(t, x, s);
    for (std::size_t i = 0; i < ud; ++i) {
      for (std::size_t j = 0; j < ud; ++j) {
        double a = 0.0;  // (sigma sigma^T)_ij
        for (std::size_t k = 0; k < ud; ++k) a += s[i * ud + k] * s[j * ud + k];
        if (a != 0.0) generator += 0.5 * a * second(i, j);
      }
    }
  }

  if (spec.kernel) {
    generator += spec.separable->time_factor(t) *
                 nonlocal_apply_separable(*spec.kernel, spec.separable->terms, x);
  }
  return dt() - generator - c.forcing(t, x, u0);
}

}  // namespace pidemc
