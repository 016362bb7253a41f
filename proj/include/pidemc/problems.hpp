// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Built-in test problems and the manufactured-solution residual check.
//
//   du/dt - L u = f(t, x, u) in (0, T] x Omega,  u = g on the exterior,
//   u(0, .) = u0,
//   L u = 1/2 tr(sigma sigma^T Hess u) + mu . grad u
//         + int_{B_delta} [u(x + c(t, x, z)) - u(x)] phi(z) dz.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pidemc/box.hpp"
#include "pidemc/kernels.hpp"
#include "pidemc/sde.hpp"

namespace pidemc {

/// Dense univariate polynomial, ascending coefficients.
struct Polynomial {
  std::vector<double> coeffs;

  double operator()(double x) const;
  Polynomial derivative(int order = 1) const;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// u(t, x) = time_factor(t) * sum_j terms[j](x_j).
struct SeparableSolution {
  std::function<double(double)> time_factor;
  std::vector<Polynomial> terms;
};

struct ProblemSpec {
  std::string name;
  int dim = 0;
  Box box;
  double T = 1.0;
  std::optional<KernelSpec> kernel;  // empty: no jump part
  std::shared_ptr<const CoefficientSet> coeffs;
  std::function<double(double, std::span<const double>)> exact;  // empty if unknown
  std::optional<SeparableSolution> separable;  // structure of `exact`, when available
  bool identity_jump = false;                  // c(t, x, z) = z

  bool has_exact() const { return static_cast<bool>(exact); }
  const KernelSpec* kernel_ptr() const { return kernel ? &*kernel : nullptr; }
};

/// Constant kernel on B_delta, c = z, u = sin(10t) sum_j (x_j^5 / j - x_j^3 / (j + 1)).
ProblemSpec example1(int d, double delta = 0.4);

/// No jumps, u = cos(t^2) exp(-|x|^2). The original setting is d = 100.
ProblemSpec example2(int d = 100);

/// Hypersingular kernel, f = |sin u|^{2/3}, g = 0, u0 = 0; no exact solution.
ProblemSpec example3(int d, double alpha, double delta = 0.4);

/// Same construction in another dimension (built-ins only).
ProblemSpec with_dimension(const ProblemSpec& spec, int d);

/// Built-in by name: example1 | example2 | example3.
ProblemSpec make_problem(const std::string& name, int d, double alpha, double delta);

/// M_k = int_{B_delta} z_1^k phi(|z|) dz by radial quadrature (k even >= 0).
double ball_moment(const KernelSpec& kernel, int k);

/// int [u(x + z) - u(x)] phi(z) dz for u(x) = sum_j polys[j](x_j), exact
/// through the even ball moments.
double nonlocal_apply_separable(const KernelSpec& kernel, const std::vector<Polynomial>& polys,
                                std::span<const double> x);

/// du/dt - L u - f(t, x, u) at (t, x) for the exact solution. Derivatives by
/// Richardson-extrapolated central differences; the nonlocal part through
/// nonlocal_apply_separable. Throws InvalidArgument without an exact
/// solution, or with a kernel but no separable structure and c = z.
double residual_oracle(const ProblemSpec& spec, double t, std::span<const double> x);

}  // namespace pidemc
