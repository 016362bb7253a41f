// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pidemc/error.hpp"
#include "pidemc/simd/kernels.hpp"

namespace pidemc {

namespace {

void require_finite(std::span<const double> v, const char* what, double t,
                    std::span<const double> x) {
  for (double e : v) {
    if (!std::isfinite(e)) {
      std::ostringstream msg;
      msg << what << " is not finite at t=" << t << ", x=(";
      for (std::size_t i = 0; i < x.size() && i < 4; ++i) msg << (i ? ", " : "") << x[i];
      msg << (x.size() > 4 ? ", ...)" : ")");
      throw NumericFailure(msg.str());
    }
  }
}

[[noreturn]] void path_failure(std::uint32_t step, std::uint32_t node, std::uint32_t path) {
  throw NumericFailure("non-finite path end point at step " + std::to_string(step) + ", node " +
                       std::to_string(node) + ", path " + std::to_string(path));
}

}  // namespace

FunctionCoefficients::FunctionCoefficients(int dim) : dim_(dim) {
  if (dim < 1) detail::throw_invalid("coefficients: dimension must be >= 1");
}

FunctionCoefficients& FunctionCoefficients::set_drift(VecFn fn) {
  drift_ = std::move(fn);
  return *this;
}
FunctionCoefficients& FunctionCoefficients::set_diffusion(DiffusionShape shape, VecFn fn) {
  shape_ = shape;
  diffusion_ = std::move(fn);
  return *this;
}
FunctionCoefficients& FunctionCoefficients::set_jump(JumpFn fn) {
  jump_ = std::move(fn);
  return *this;
}
FunctionCoefficients& FunctionCoefficients::set_forcing(ForcingFn fn) {
  forcing_ = std::move(fn);
  return *this;
}
FunctionCoefficients& FunctionCoefficients::set_boundary(ScalarFn fn) {
  boundary_ = std::move(fn);
  return *this;
}
FunctionCoefficients& FunctionCoefficients::set_initial(InitialFn fn) {
  initial_ = std::move(fn);
  return *this;
}

void FunctionCoefficients::drift(double t, std::span<const double> x,
                                 std::span<double> out) const {
  if (drift_) {
    drift_(t, x, out);
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
}

void FunctionCoefficients::diffusion(double t, std::span<const double> x,
                                     std::span<double> out) const {
  if (diffusion_) {
    diffusion_(t, x, out);
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
}

void FunctionCoefficients::jump(double t, std::span<const double> x, std::span<const double> z,
                                std::span<double> out) const {
  if (jump_) {
    jump_(t, x, z, out);
  } else {
    std::copy(z.begin(), z.end(), out.begin());
  }
}

double FunctionCoefficients::forcing(double t, std::span<const double> x, double u) const {
  return forcing_ ? forcing_(t, x, u) : 0.0;
}

double FunctionCoefficients::boundary(double t, std::span<const double> x) const {
  return boundary_ ? boundary_(t, x) : 0.0;
}

double FunctionCoefficients::initial(std::span<const double> x) const {
  return initial_ ? initial_(x) : 0.0;
}

bool in_domain(const Box& box, std::span<const double> x) { return box.contains(x); }

StepContext::StepContext(const CoefficientSet& coeffs, const KernelSpec* kernel, const Box& box,
                         std::span<const double> x, double t, double dt, std::uint32_t max_jumps)
    : coeffs_(&coeffs), kernel_(kernel), dim_(coeffs.dimension()), t_(t), max_jumps_(max_jumps),
      x_(x.begin(), x.end()) {
  const auto d = static_cast<std::size_t>(dim_);
  if (x.size() != d || box.dimension() != d) {
    detail::throw_invalid("step: dimension mismatch between x, box and coefficients");
  }
  if (kernel && kernel->dimension() != dim_) {
    detail::throw_invalid("step: kernel dimension does not match coefficients");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) detail::throw_invalid("step: dt must be finite and > 0");
  if (!in_domain(box, x)) throw PreconditionViolation("step: start point is not in the open domain");

  base_.resize(d);
  coeffs.drift(t, x, base_);
  require_finite(base_, "drift", t, x);
  for (std::size_t i = 0; i < d; ++i) base_[i] = x_[i] + base_[i] * dt;

  dense_ = coeffs.diffusion_shape() == DiffusionShape::Dense;
  scaled_.resize(dense_ ? d * d : d);
  coeffs.diffusion(t, x, scaled_);
  require_finite(scaled_, "diffusion", t, x);
  const double sq = std::sqrt(dt);
  for (double& s : scaled_) s *= sq;

  if (kernel_) jump_mean_ = jump_intensity(*kernel_) * dt;
}

std::pair<std::uint32_t, std::uint32_t> StepContext::finish(const double* w, double u_poisson,
                                                            RandomStream& stream,
                                                            double* x_end) const {
  const auto d = static_cast<std::size_t>(dim_);
  if (dense_) {
    for (std::size_t i = 0; i < d; ++i) {
      const double* row = scaled_.data() + i * d;
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += row[j] * w[j];
      x_end[i] = base_[i] + acc;
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) x_end[i] = base_[i] + scaled_[i] * w[i];
  }
  if (jump_mean_ == 0.0) return {0, 0};
  const std::uint32_t n = poisson_from_uniform(jump_mean_, u_poisson);
  const std::uint32_t applied = std::min(n, max_jumps_);
  if (applied == 0) return {n, 0};
  thread_local std::vector<double> z, c;
  z.resize(d);
  c.resize(d);
  for (std::uint32_t k = 0; k < applied; ++k) {
    sample_jump(*kernel_, stream, z);
    coeffs_->jump(t_, x_, z, c);
    for (std::size_t i = 0; i < d; ++i) x_end[i] += c[i];
  }
  return {n, applied};
}

PathOutcome step_path(const CoefficientSet& coeffs, const KernelSpec* kernel, const Box& box,
                      std::span<const double> x, double t, double dt, const StreamKey& key,
                      std::uint32_t max_jumps) {
  const StepContext ctx(coeffs, kernel, box, x, t, dt, max_jumps);
  const auto d = static_cast<std::size_t>(ctx.dimension());
  RandomStream stream(key);
  std::vector<double> w(d);
  for (double& v : w) v = stream.standard_normal();
  const double u = stream.uniform01();
  PathOutcome out;
  out.x_end.resize(d);
  const auto [n, applied] = ctx.finish(w.data(), u, stream, out.x_end.data());
  for (double v : out.x_end) {
    if (!std::isfinite(v)) path_failure(key.step_index, key.node_index, key.path_index);
  }
  out.exited = !in_domain(box, out.x_end);
  out.jumps = n;
  out.applied_jumps = applied;
  out.dt_effective = dt;
  return out;
}

void step_paths(const StepContext& ctx, const Box& box, std::uint32_t step, std::uint32_t node,
                std::uint32_t first_path, std::size_t n, std::uint64_t seed, double* x_end,
                std::uint8_t* exited, std::uint32_t* jumps) {
  if (n == 0) return;
  const auto d = static_cast<std::size_t>(ctx.dimension());
  const std::size_t nb = d / 2 + 1;  // blocks covering draws 0 .. d
  const std::size_t total = n * nb;
  const simd::Kernels& k = simd::kernels();

  std::vector<std::uint32_t> c0(total, step), c1(total, node), c2(total), c3(total);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t b = 0; b < nb; ++b) {
      c2[p * nb + b] = first_path + static_cast<std::uint32_t>(p);
      c3[p * nb + b] = static_cast<std::uint32_t>(b);
    }
  }
  std::vector<std::uint32_t> o0(total), o1(total), o2(total), o3(total);
  k.philox(philox::key_from_seed(seed), c0.data(), c1.data(), c2.data(), c3.data(), o0.data(),
           o1.data(), o2.data(), o3.data(), total);

  auto words = [&](std::size_t p, std::size_t draw) -> std::pair<std::uint32_t, std::uint32_t> {
    const std::size_t idx = p * nb + draw / 2;
    return draw % 2 == 0 ? std::pair{o0[idx], o1[idx]} : std::pair{o2[idx], o3[idx]};
  };
  std::vector<double> u_open(n * d), w(n * d);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto [hi, lo] = words(p, i);
      u_open[p * d + i] = to_unit_open(hi, lo);
    }
  }
  k.normal_quantile(u_open.data(), w.data(), w.size());

  for (std::size_t p = 0; p < n; ++p) {
    const auto path = first_path + static_cast<std::uint32_t>(p);
    const auto [hi, lo] = words(p, d);
    const double u = to_unit_closed_open(hi, lo);
    RandomStream stream(StreamKey{step, node, path, seed}, d + 1);
    double* xe = x_end + p * d;
    const auto [count, applied] = ctx.finish(w.data() + p * d, u, stream, xe);
    (void)applied;
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(xe[i])) path_failure(step, node, path);
    }
    exited[p] = in_domain(box, std::span<const double>(xe, d)) ? 0 : 1;
    jumps[p] = count;
  }
}

}  // namespace pidemc
