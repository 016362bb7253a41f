// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pidemc {

/// Axis-aligned box prod_i [lower_i, upper_i]. The solver domain is the open
/// interior; the volume constraint applies on its complement.
class Box {
 public:
  Box() = default;
  Box(std::vector<double> lower, std::vector<double> upper);

  /// [-1, 1]^d
  static Box symmetric(std::size_t d, double half_width = 1.0);

  std::size_t dimension() const { return lower_.size(); }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }
  double center(std::size_t i) const { return center_[i]; }
  double half_width(std::size_t i) const { return half_[i]; }
  double volume() const;

  /// Strict interior test: lower_i < x_i < upper_i for every i.
  bool contains(std::span<const double> x) const;

  /// Componentwise projection onto the closed box.
  void clamp(std::span<double> x) const;

  /// Euclidean distance from x to the closed box (0 inside).
  double distance(std::span<const double> x) const;

  bool operator==(const Box& other) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> center_;
  std::vector<double> half_;
};

}  // namespace pidemc
