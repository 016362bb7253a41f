// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Radial jump kernels on the ball B_delta and their exact samplers.
//
// Integrable kernels (ConstantIndicator, Gaussian) are sampled from
// psi = phi / lambda with lambda = int phi. Hypersingular kernels
// (Hypersingular, Tempered) are sampled from psi = phi |z|^2 / lambda with
// lambda = int phi |z|^2, which the normalization constants fix to 1.
// In every case the radius comes from inverting the radial CDF and the
// direction is uniform on the sphere.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pidemc/rng.hpp"

namespace pidemc {

enum class KernelFamily { ConstantIndicator, Hypersingular, Tempered, Gaussian };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

class KernelSpec {
 public:
  static KernelSpec constant_indicator(int dim, double delta);
  static KernelSpec hypersingular(int dim, double delta, double alpha);
  static KernelSpec tempered(int dim, double delta, double alpha, double beta);
  static KernelSpec gaussian(int dim, double delta, double sigma);

  KernelFamily family() const { return family_; }
  int dimension() const { return dim_; }
  double delta() const { return delta_; }
  /// Singularity order; 0 for families without one.
  double alpha() const { return alpha_; }
  /// Tempering rate; 0 unless Tempered.
  double beta() const { return beta_; }
  /// Gaussian deviation; 0 unless Gaussian.
  double sigma() const { return sigma_; }

  /// Same family and parameters in another dimension.
  KernelSpec with_dimension(int dim) const;

  bool operator==(const KernelSpec& other) const;

 private:
  KernelSpec(KernelFamily family, int dim, double delta, double alpha, double beta,
             double sigma);

  friend double log_normalization_constant(const KernelSpec& spec);
  friend double sample_radius(const KernelSpec& spec, double xi);
  friend double radial_cdf(const KernelSpec& spec, double r);

  KernelFamily family_;
  int dim_;
  double delta_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double sigma_ = 0.0;
  // Incomplete-gamma shape and scaled radius for the Tempered/Gaussian CDFs:
  // F(r) = P(shape, arg(r)) / P(shape, arg(delta)).
  double gamma_shape_ = 0.0;
  double log_p_at_delta_ = 0.0;
};

struct JumpSample {
  double r = 0.0;
  std::vector<double> direction;
  std::vector<double> z;
};

/// C_H, C_T, C_G for the singular/Gaussian families; 1 for the indicator.
double normalization_constant(const KernelSpec& spec);
double log_normalization_constant(const KernelSpec& spec);

/// lambda: 1 for the normalized families, |B_delta| for the indicator.
double jump_intensity(const KernelSpec& spec);

/// phi at radius r in (0, delta]; 0 outside the ball.
double kernel_value(const KernelSpec& spec, double r);
/// ln phi(r) for r in (0, delta]; avoids overflow of r^{-d-alpha} at large d.
double log_kernel_value(const KernelSpec& spec, double r);

/// Inverse radial CDF. xi in [0, 1] maps onto r in [0, delta].
double sample_radius(const KernelSpec& spec, double xi);

/// Radial CDF F(r) of the sampling density, r in [0, delta].
double radial_cdf(const KernelSpec& spec, double r);

/// Uniform direction on S^{d-1}: d normals from `stream`, normalized.
/// Redraws on the (measure-zero) all-zero vector.
void sample_direction(RandomStream& stream, std::span<double> out);
std::vector<double> sample_direction(const StreamKey& key, int dim);

/// One jump: radius from the next uniform of `stream`, then the direction.
/// Writes z and returns its radius.
double sample_jump(const KernelSpec& spec, RandomStream& stream, std::span<double> z);
JumpSample sample_jump(const KernelSpec& spec, const StreamKey& key);

}  // namespace pidemc
