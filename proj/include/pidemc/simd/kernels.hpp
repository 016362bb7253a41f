// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops with a scalar reference and an AVX2 variant.
// Variants are selected at runtime and must agree bit for bit with the
// scalar reference: the build disables FP contraction and every vector
// kernel mirrors the scalar operation order.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pidemc/rng.hpp"

namespace pidemc::simd {

enum class Level { Scalar, Avx2 };

std::string_view name(Level level);

/// Best level the running CPU supports.
Level detected();

/// Level used by kernels(). Defaults to detected(); the environment variable
/// PIDEMC_SIMD=scalar|avx2 overrides it at first use.
Level active();

/// Pin the active level (tests, benchmarks). Throws InvalidArgument if the
/// CPU does not support it.
void force(Level level);

/// Flattened sparse-grid evaluation plan. Built once per design; read-only
/// during evaluation.
struct SparseEvalPlan {
  std::size_t dim = 0;
  std::vector<double> center;      // per dimension
  std::vector<double> half_width;  // per dimension

  // One-dimensional levels >= 2. Level k's node set occupies
  // [level_offset[k], level_offset[k] + level_size[k]) inside each
  // dimension's block of basis values.
  std::vector<std::uint32_t> level_offset;
  std::vector<std::uint32_t> level_size;
  std::vector<double> level_nodes;    // concatenated, indexed by level_offset
  std::vector<double> level_weights;  // barycentric weights, same layout
  std::size_t dim_stride = 0;         // basis values per dimension

  // Terms in CSR form. Active dimensions (1-D level >= 2) of term t are
  // active_base/active_extent[term_active[t] .. term_active[t + 1]); the
  // tensor's point indices, last active dimension fastest, are
  // point_index[term_points[t] .. term_points[t + 1]).
  std::vector<double> coefficient;
  std::vector<std::uint32_t> term_active;
  std::vector<std::uint32_t> active_base;    // dim * dim_stride + level_offset
  std::vector<std::uint32_t> active_extent;  // node count of that level
  std::vector<std::uint32_t> term_points;
  std::vector<std::uint32_t> point_index;
  std::size_t max_active = 0;
};

struct Kernels {
  /// out_k[i] = word k of Philox4x32-10 at counter (c0[i], c1[i], c2[i], c3[i]).
  void (*philox)(const philox::Key& key, const std::uint32_t* c0,
                 const std::uint32_t* c1, const std::uint32_t* c2,
                 const std::uint32_t* c3, std::uint32_t* o0, std::uint32_t* o1,
                 std::uint32_t* o2, std::uint32_t* o3, std::size_t n);

  /// z[i] = normal_quantile(u[i]) for u in (0, 1). u and z must not overlap.
  void (*normal_quantile)(const double* u, double* z, std::size_t n);

  /// out[p] = Smolyak interpolant at the p-th point of `points` (row-major
  /// n x dim, physical coordinates, already projected if required).
  void (*sparse_eval)(const SparseEvalPlan& plan, const double* values,
                      const double* points, std::size_t n, double* out);
};

const Kernels& kernels(Level level);
inline const Kernels& kernels() { return kernels(active()); }

namespace scalar {
void philox(const philox::Key& key, const std::uint32_t* c0, const std::uint32_t* c1,
            const std::uint32_t* c2, const std::uint32_t* c3, std::uint32_t* o0,
            std::uint32_t* o1, std::uint32_t* o2, std::uint32_t* o3, std::size_t n);
void normal_quantile(const double* u, double* z, std::size_t n);
void sparse_eval(const SparseEvalPlan& plan, const double* values, const double* points,
                 std::size_t n, double* out);
}  // namespace scalar

namespace avx2 {
bool compiled();
void philox(const philox::Key& key, const std::uint32_t* c0, const std::uint32_t* c1,
            const std::uint32_t* c2, const std::uint32_t* c3, std::uint32_t* o0,
            std::uint32_t* o1, std::uint32_t* o2, std::uint32_t* o3, std::size_t n);
void normal_quantile(const double* u, double* z, std::size_t n);
void sparse_eval(const SparseEvalPlan& plan, const double* values, const double* points,
                 std::size_t n, double* out);
}  // namespace avx2

}  // namespace pidemc::simd
