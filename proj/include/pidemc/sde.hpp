// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// One time step of the jump-diffusion
//   X = x + mu(t, x) dt + sigma(t, x) W_dt + sum_{k <= min(N, max_jumps)} c(t, x, z_k)
// with N ~ Poisson(lambda dt) and z_k drawn from the kernel's sampler.
// Coefficients are frozen at the start point of the step.
//
// Draw order within the stream of key (step, node, path):
//   d normals, 1 Poisson uniform, then per jump 1 radius uniform and the
//   direction normals.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pidemc/box.hpp"
#include "pidemc/kernels.hpp"
#include "pidemc/rng.hpp"

namespace pidemc {

enum class DiffusionShape { Diagonal, Dense };

/// mu, sigma, c, f, g, u0 of a problem. Implementations must be pure and
/// safe to call concurrently.
class CoefficientSet {
 public:
  virtual ~CoefficientSet() = default;

  virtual int dimension() const = 0;
  virtual void drift(double t, std::span<const double> x, std::span<double> out) const = 0;
  /// Diagonal: d entries. Dense: d x d row-major.
  virtual DiffusionShape diffusion_shape() const = 0;
  virtual void diffusion(double t, std::span<const double> x, std::span<double> out) const = 0;
  /// Jump amplitude c(t, x, z).
  virtual void jump(double t, std::span<const double> x, std::span<const double> z,
                    std::span<double> out) const = 0;
  /// f(t, x, u), source terms included.
  virtual double forcing(double t, std::span<const double> x, double u) const = 0;
  /// Volume-constraint data g(t, x) on the complement of the domain.
  virtual double boundary(double t, std::span<const double> x) const = 0;
  virtual double initial(std::span<const double> x) const = 0;
};

/// CoefficientSet from callables. Unset drift/diffusion/jump mean zero and
/// c(t, x, z) = z respectively; unset f, g, u0 mean zero.
class FunctionCoefficients final : public CoefficientSet {
 public:
  using VecFn = std::function<void(double, std::span<const double>, std::span<double>)>;
  using JumpFn = std::function<void(double, std::span<const double>, std::span<const double>,
                                    std::span<double>)>;
  using ForcingFn = std::function<double(double, std::span<const double>, double)>;
  using ScalarFn = std::function<double(double, std::span<const double>)>;
  using InitialFn = std::function<double(std::span<const double>)>;

  explicit FunctionCoefficients(int dim);

  FunctionCoefficients& set_drift(VecFn fn);
  FunctionCoefficients& set_diffusion(DiffusionShape shape, VecFn fn);
  FunctionCoefficients& set_jump(JumpFn fn);
  FunctionCoefficients& set_forcing(ForcingFn fn);
  FunctionCoefficients& set_boundary(ScalarFn fn);
  FunctionCoefficients& set_initial(InitialFn fn);

  int dimension() const override { return dim_; }
  void drift(double t, std::span<const double> x, std::span<double> out) const override;
  DiffusionShape diffusion_shape() const override { return shape_; }
  void diffusion(double t, std::span<const double> x, std::span<double> out) const override;
  void jump(double t, std::span<const double> x, std::span<const double> z,
            std::span<double> out) const override;
  double forcing(double t, std::span<const double> x, double u) const override;
  double boundary(double t, std::span<const double> x) const override;
  double initial(std::span<const double> x) const override;

 private:
  int dim_;
  DiffusionShape shape_ = DiffusionShape::Diagonal;
  VecFn drift_, diffusion_;
  JumpFn jump_;
  ForcingFn forcing_;
  ScalarFn boundary_;
  InitialFn initial_;
};

struct PathOutcome {
  std::vector<double> x_end;
  bool exited = false;
  std::uint32_t jumps = 0;          // sampled Poisson count N
  std::uint32_t applied_jumps = 0;  // min(N, max_jumps)
  double dt_effective = 0.0;
};

/// Open-box membership.
bool in_domain(const Box& box, std::span<const double> x);

/// Everything about one (node, step) that does not depend on the path.
/// Coefficients are evaluated once here.
class StepContext {
 public:
  StepContext(const CoefficientSet& coeffs, const KernelSpec* kernel, const Box& box,
              std::span<const double> x, double t, double dt, std::uint32_t max_jumps);

  int dimension() const { return dim_; }
  double jump_mean() const { return jump_mean_; }

  /// Applies drift, the diffusion of the d normals `w`, and the jumps implied
  /// by the Poisson uniform `u_poisson`; jump draws continue from `stream`,
  /// which must be positioned just past the Poisson draw. Writes X and
  /// returns (N, applied).
  std::pair<std::uint32_t, std::uint32_t> finish(const double* w, double u_poisson,
                                                 RandomStream& stream, double* x_end) const;

 private:
  const CoefficientSet* coeffs_;
  const KernelSpec* kernel_;
  int dim_;
  double t_;
  std::uint32_t max_jumps_;
  double jump_mean_ = 0.0;
  std::vector<double> x_;
  std::vector<double> base_;    // x + mu dt
  std::vector<double> scaled_;  // sigma sqrt(dt), diagonal or dense
  bool dense_ = false;
};

/// Single path, reference implementation. `kernel` may be null (no jumps).
/// Throws PreconditionViolation if x is not in the open box, NumericFailure
/// on non-finite coefficients or results.
PathOutcome step_path(const CoefficientSet& coeffs, const KernelSpec* kernel, const Box& box,
                      std::span<const double> x, double t, double dt, const StreamKey& key,
                      std::uint32_t max_jumps = 1);

/// Paths first_path .. first_path + n - 1 from one node, vectorized RNG.
/// Row p of x_end (n x d) equals step_path(...).x_end for that path bit for
/// bit; exited[p] and jumps[p] likewise.
void step_paths(const StepContext& ctx, const Box& box, std::uint32_t step, std::uint32_t node,
                std::uint32_t first_path, std::size_t n, std::uint64_t seed, double* x_end,
                std::uint8_t* exited, std::uint32_t* jumps);

}  // namespace pidemc
