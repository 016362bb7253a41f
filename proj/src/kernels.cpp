// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pidemc/error.hpp"
#include "pidemc/specfun.hpp"

namespace pidemc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) detail::throw_invalid("kernel: " + what);
}

// Volume of the radius-delta ball in R^d, in log form.
double log_ball_volume(int d, double delta) {
  const double half = 0.5 * d;
  return half * std::log(std::numbers::pi) + d * std::log(delta) - std::lgamma(half + 1.0);
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::ConstantIndicator: return "constant";
    case KernelFamily::Hypersingular: return "hypersingular";
    case KernelFamily::Tempered: return "tempered";
    case KernelFamily::Gaussian: return "gaussian";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "constant" || name == "indicator") return KernelFamily::ConstantIndicator;
  if (name == "hypersingular") return KernelFamily::Hypersingular;
  if (name == "tempered") return KernelFamily::Tempered;
  if (name == "gaussian") return KernelFamily::Gaussian;
  detail::throw_invalid("unknown kernel family '" + std::string(name) +
                        "' (expected constant|hypersingular|tempered|gaussian)");
}

KernelSpec::KernelSpec(KernelFamily family, int dim, double delta, double alpha,
                       double beta, double sigma)
    : family_(family), dim_(dim), delta_(delta), alpha_(alpha), beta_(beta), sigma_(sigma) {
  require(dim >= 1, "dimension must be >= 1");
  require(delta > 0.0 && std::isfinite(delta), "delta must be finite and > 0");
  switch (family) {
    case KernelFamily::ConstantIndicator:
      break;
    case KernelFamily::Hypersingular:
      require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2)");
      break;
    case KernelFamily::Tempered:
      require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2)");
      require(beta > 0.0 && std::isfinite(beta), "beta must be finite and > 0");
      gamma_shape_ = 2.0 - alpha;
      log_p_at_delta_ = specfun::log_regularized_lower_gamma(gamma_shape_, beta * delta);
      break;
    case KernelFamily::Gaussian:
      require(sigma > 0.0 && std::isfinite(sigma), "sigma must be finite and > 0");
      gamma_shape_ = 0.5 * dim;
      log_p_at_delta_ = specfun::log_regularized_lower_gamma(
          gamma_shape_, delta * delta / (2.0 * sigma * sigma));
      break;
  }
  require(std::isfinite(log_p_at_delta_), "radial CDF normalizer underflows");
}

KernelSpec KernelSpec::constant_indicator(int dim, double delta) {
  return KernelSpec(KernelFamily::ConstantIndicator, dim, delta, 0.0, 0.0, 0.0);
}

KernelSpec KernelSpec::hypersingular(int dim, double delta, double alpha) {
  return KernelSpec(KernelFamily::Hypersingular, dim, delta, alpha, 0.0, 0.0);
}

KernelSpec KernelSpec::tempered(int dim, double delta, double alpha, double beta) {
  return KernelSpec(KernelFamily::Tempered, dim, delta, alpha, beta, 0.0);
}

KernelSpec KernelSpec::gaussian(int dim, double delta, double sigma) {
  return KernelSpec(KernelFamily::Gaussian, dim, delta, 0.0, 0.0, sigma);
}

KernelSpec KernelSpec::with_dimension(int dim) const {
  return KernelSpec(family_, dim, delta_, alpha_, beta_, sigma_);
}

bool KernelSpec::operator==(const KernelSpec& other) const {
  return family_ == other.family_ && dim_ == other.dim_ && delta_ == other.delta_ &&
         alpha_ == other.alpha_ && beta_ == other.beta_ && sigma_ == other.sigma_;
}

double log_normalization_constant(const KernelSpec& spec) {
  const int d = spec.dim_;
  const double log_omega = specfun::log_omega_d(d);
  switch (spec.family_) {
    case KernelFamily::ConstantIndicator:
      return 0.0;
    case KernelFamily::Hypersingular:
      // (2 - alpha) delta^{alpha - 2} / omega_d
      return std::log(2.0 - spec.alpha_) + (spec.alpha_ - 2.0) * std::log(spec.delta_) -
             log_omega;
    case KernelFamily::Tempered: {
      // beta^{2 - alpha} / (omega_d gamma(2 - alpha, beta delta))
      const double log_gamma = std::lgamma(spec.gamma_shape_) + spec.log_p_at_delta_;
      return spec.gamma_shape_ * std::log(spec.beta_) - log_omega - log_gamma;
    }
    case KernelFamily::Gaussian: {
      // 2^{1 - d/2} / (omega_d sigma^d gamma(d/2, delta^2 / (2 sigma^2)))
      const double log_gamma = std::lgamma(spec.gamma_shape_) + spec.log_p_at_delta_;
      return (1.0 - 0.5 * d) * std::numbers::ln2 - log_omega - d * std::log(spec.sigma_) -
             log_gamma;
    }
  }
  return 0.0;
}

double normalization_constant(const KernelSpec& spec) {
  if (spec.family() == KernelFamily::ConstantIndicator) return 1.0;
  return std::exp(log_normalization_constant(spec));
}

double jump_intensity(const KernelSpec& spec) {
  if (spec.family() == KernelFamily::ConstantIndicator) {
    return std::exp(log_ball_volume(spec.dimension(), spec.delta()));
  }
  return 1.0;
}

double log_kernel_value(const KernelSpec& spec, double r) {
  require(r > 0.0 && r <= spec.delta(), "kernel evaluated outside (0, delta]");
  const int d = spec.dimension();
  const double log_c = log_normalization_constant(spec);
  switch (spec.family()) {
    case KernelFamily::ConstantIndicator:
      return 0.0;
    case KernelFamily::Hypersingular:
      return log_c - (d + spec.alpha()) * std::log(r);
    case KernelFamily::Tempered:
      return log_c - spec.beta() * r - (d + spec.alpha()) * std::log(r);
    case KernelFamily::Gaussian:
      return log_c - r * r / (2.0 * spec.sigma() * spec.sigma());
  }
  return 0.0;
}

double kernel_value(const KernelSpec& spec, double r) {
  if (!(r > 0.0) || r > spec.delta()) return 0.0;
  return std::exp(log_kernel_value(spec, r));
}

double sample_radius(const KernelSpec& spec, double xi) {
  require(xi >= 0.0 && xi <= 1.0, "sample_radius: xi must lie in [0, 1]");
  const double delta = spec.delta_;
  if (xi == 0.0) return 0.0;
  if (xi == 1.0) return delta;
  double r = 0.0;
  switch (spec.family_) {
    case KernelFamily::ConstantIndicator:
      r = delta * std::pow(xi, 1.0 / spec.dim_);
      break;
    case KernelFamily::Hypersingular:
      r = delta * std::pow(xi, 1.0 / (2.0 - spec.alpha_));
      break;
    case KernelFamily::Tempered: {
      // gamma(2 - alpha, beta r) = xi gamma(2 - alpha, beta delta)
      const double x = specfun::inverse_regularized_lower_gamma_log(
          spec.gamma_shape_, std::log(xi) + spec.log_p_at_delta_);
      r = x / spec.beta_;
      break;
    }
    case KernelFamily::Gaussian: {
      const double x = specfun::inverse_regularized_lower_gamma_log(
          spec.gamma_shape_, std::log(xi) + spec.log_p_at_delta_);
      r = spec.sigma_ * std::sqrt(2.0 * x);
      break;
    }
  }
  return std::min(r, delta);
}

double radial_cdf(const KernelSpec& spec, double r) {
  require(r >= 0.0 && r <= spec.delta_, "radial_cdf: r must lie in [0, delta]");
  if (r == 0.0) return 0.0;
  if (r == spec.delta_) return 1.0;
  switch (spec.family_) {
    case KernelFamily::ConstantIndicator:
      return std::pow(r / spec.delta_, spec.dim_);
    case KernelFamily::Hypersingular:
      return std::pow(r / spec.delta_, 2.0 - spec.alpha_);
    case KernelFamily::Tempered:
      return std::exp(specfun::log_regularized_lower_gamma(spec.gamma_shape_, spec.beta_ * r) -
                      spec.log_p_at_delta_);
    case KernelFamily::Gaussian:
      return std::exp(specfun::log_regularized_lower_gamma(
                          spec.gamma_shape_, r * r / (2.0 * spec.sigma_ * spec.sigma_)) -
                      spec.log_p_at_delta_);
  }
  return 0.0;
}

void sample_direction(RandomStream& stream, std::span<double> out) {
  if (out.empty()) detail::throw_invalid("sample_direction: d must be >= 1");
  for (;;) {
    double norm2 = 0.0;
    for (double& v : out) {
      v = stream.standard_normal();
      norm2 += v * v;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : out) v *= inv;
      return;
    }
  }
}

std::vector<double> sample_direction(const StreamKey& key, int dim) {
  if (dim < 1) detail::throw_invalid("sample_direction: d must be >= 1");
  RandomStream stream(key);
  std::vector<double> out(static_cast<std::size_t>(dim));
  sample_direction(stream, out);
  return out;
}

double sample_jump(const KernelSpec& spec, RandomStream& stream, std::span<double> z) {
  const double r = sample_radius(spec, stream.uniform01());
  sample_direction(stream, z);
  for (double& v : z) v *= r;
  return r;
}

JumpSample sample_jump(const KernelSpec& spec, const StreamKey& key) {
  RandomStream stream(key);
  JumpSample sample;
  sample.r = sample_radius(spec, stream.uniform01());
  sample.direction.resize(static_cast<std::size_t>(spec.dimension()));
  sample_direction(stream, sample.direction);
  sample.z = sample.direction;
  for (double& v : sample.z) v *= sample.r;
  return sample;
}

}  // namespace pidemc
