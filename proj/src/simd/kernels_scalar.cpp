// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <vector>

#include "pidemc/simd/kernels.hpp"
#include "pidemc/specfun.hpp"

namespace pidemc::simd::scalar {

void philox(const philox::Key& key, const std::uint32_t* c0, const std::uint32_t* c1,
            const std::uint32_t* c2, const std::uint32_t* c3, std::uint32_t* o0,
            std::uint32_t* o1, std::uint32_t* o2, std::uint32_t* o3, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = philox::philox4x32({c0[i], c1[i], c2[i], c3[i]}, key);
    o0[i] = b[0];
    o1[i] = b[1];
    o2[i] = b[2];
    o3[i] = b[3];
  }
}

void normal_quantile(const double* u, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = specfun::normal_quantile(u[i]);
}

void sparse_eval(const SparseEvalPlan& plan, const double* values, const double* points,
                 std::size_t n, double* out) {
  const std::size_t d = plan.dim;
  thread_local std::vector<double> basis;
  thread_local std::vector<double> prefix;
  thread_local std::vector<std::uint32_t> odo;
  basis.resize(d * plan.dim_stride);
  prefix.resize(plan.max_active + 1);
  odo.resize(plan.max_active + 1);
  const std::size_t n_levels = plan.level_offset.size();
  const std::size_t n_terms = plan.coefficient.size();

  for (std::size_t p = 0; p < n; ++p) {
    const double* x = points + p * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = (x[i] - plan.center[i]) / plan.half_width[i];
      double* b = basis.data() + i * plan.dim_stride;
      for (std::size_t k = 0; k < n_levels; ++k) {
        const std::size_t off = plan.level_offset[k];
        const std::size_t m = plan.level_size[k];
        const double* nodes = plan.level_nodes.data() + off;
        const double* w = plan.level_weights.data() + off;
        double* bk = b + off;
        std::size_t hit = m;
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double diff = xi - nodes[j];
          if (diff == 0.0) {
            hit = j;
            break;
          }
          bk[j] = w[j] / diff;
          s += bk[j];
        }
        if (hit < m) {
          for (std::size_t j = 0; j < m; ++j) bk[j] = j == hit ? 1.0 : 0.0;
        } else {
          for (std::size_t j = 0; j < m; ++j) bk[j] = bk[j] / s;
        }
      }
    }

    double result = 0.0;
    for (std::size_t t = 0; t < n_terms; ++t) {
      const std::uint32_t a0 = plan.term_active[t];
      const std::size_t na = plan.term_active[t + 1] - a0;
      const std::uint32_t* base = plan.active_base.data() + a0;
      const std::uint32_t* extent = plan.active_extent.data() + a0;
      const std::uint32_t* idx = plan.point_index.data() + plan.term_points[t];
      double acc = 0.0;
      if (na == 0) {
        acc = values[idx[0]];
      } else {
        prefix[0] = 1.0;
        for (std::size_t a = 0; a < na; ++a) {
          odo[a] = 0;
          prefix[a + 1] = prefix[a] * basis[base[a]];
        }
        std::size_t flat = 0;
        for (;;) {
          acc += prefix[na] * values[idx[flat]];
          ++flat;
          std::size_t k = na;
          while (k > 0) {
            --k;
            if (++odo[k] < extent[k]) break;
            odo[k] = 0;
            if (k == 0) {
              k = na;  // odometer wrapped: done
              break;
            }
          }
          if (k == na) break;
          for (std::size_t a = k; a < na; ++a) {
            prefix[a + 1] = prefix[a] * basis[base[a] + odo[a]];
          }
        }
      }
      result += plan.coefficient[t] * acc;
    }
    out[p] = result;
  }
}

}  // namespace pidemc::simd::scalar
