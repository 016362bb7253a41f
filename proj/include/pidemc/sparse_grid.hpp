// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Smolyak sparse grids on nested Chebyshev-Gauss-Lobatto nodes.
//
// A user level L >= 1 in d dimensions is the Smolyak combination with total
// level m = d + L - 1: all multi-indices l with m - d + 1 <= |l| <= m, each
// weighted by (-1)^{m - |l|} binom(d - 1, m - |l|). L = 1 is the box center.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "pidemc/box.hpp"
#include "pidemc/simd/kernels.hpp"

namespace pidemc {

struct Level1D {
  int l = 1;
  int m = 1;
  std::vector<double> nodes;  // ascending, in [-1, 1]
};

/// m_l = 1 for l = 1, else 2^{l-1} + 1; node j is -cos(pi j / (m_l - 1)).
Level1D nodes_1d(int l);

/// Barycentric weights of nodes_1d(l): (-1)^j, halved at both ends.
std::vector<double> barycentric_weights_1d(int l);

struct SmolyakTerm {
  std::vector<int> levels;  // one 1-D level per dimension
  double coefficient = 0.0;
};

/// All terms of the combination formula with total level m (m >= d >= 1).
std::vector<SmolyakTerm> enumerate_terms(int d, int m);

enum class ExteriorPolicy { Clamp, Extrapolate };

std::string_view to_string(ExteriorPolicy policy);
ExteriorPolicy parse_exterior_policy(std::string_view name);

class SparseGridDesign {
 public:
  int dimension() const { return dim_; }
  int level() const { return level_; }
  /// Total Smolyak level m = d + level - 1.
  int smolyak_level() const { return dim_ + level_ - 1; }
  const Box& box() const { return box_; }

  std::size_t size() const { return n_points_; }
  /// Physical coordinates of point i.
  std::span<const double> point(std::size_t i) const;
  /// Row-major size() x dimension() coordinates.
  const std::vector<double>& coordinates() const { return coords_; }
  /// Finest-level node index per dimension; identifies a point.
  std::span<const std::uint32_t> index_key(std::size_t i) const;

  const std::vector<SmolyakTerm>& terms() const { return terms_; }
  const simd::SparseEvalPlan& plan() const { return plan_; }

 private:
  friend std::shared_ptr<const SparseGridDesign> build_grid(int, int, const Box&);
  SparseGridDesign() = default;

  int dim_ = 0;
  int level_ = 0;
  Box box_;
  std::size_t n_points_ = 0;
  std::vector<double> coords_;
  std::vector<std::uint32_t> keys_;
  std::vector<SmolyakTerm> terms_;
  simd::SparseEvalPlan plan_;
};

/// Deduplicated design at user level `level` on `box` (box.dimension() == d).
std::shared_ptr<const SparseGridDesign> build_grid(int d, int level, const Box& box);

class SparseInterpolant {
 public:
  SparseInterpolant(std::shared_ptr<const SparseGridDesign> design, std::vector<double> values,
                    ExteriorPolicy policy = ExteriorPolicy::Clamp);

  const SparseGridDesign& design() const { return *design_; }
  const std::shared_ptr<const SparseGridDesign>& design_ptr() const { return design_; }
  const std::vector<double>& values() const { return values_; }
  ExteriorPolicy policy() const { return policy_; }

  double eval(std::span<const double> x) const;

  /// out[p] = eval(points[p*d .. p*d + d)). `points` is row-major n x d.
  void eval_batch(std::span<const double> points, std::span<double> out) const;

 private:
  std::shared_ptr<const SparseGridDesign> design_;
  std::vector<double> values_;
  std::vector<double> shifted_;  // values_ - offset_
  double offset_ = 0.0;          // values_[0]; constants reproduce exactly
  ExteriorPolicy policy_;
};

SparseInterpolant fit(std::shared_ptr<const SparseGridDesign> design, std::vector<double> values,
                      ExteriorPolicy policy = ExteriorPolicy::Clamp);

}  // namespace pidemc
