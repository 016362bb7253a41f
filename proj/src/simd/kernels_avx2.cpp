// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants. This translation unit is compiled with -mavx2 (and without
// -mfma); nothing here runs unless the dispatcher confirmed CPU support.
#include "pidemc/simd/kernels.hpp"
#include "pidemc/specfun.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

#include <vector>

namespace pidemc::simd::avx2 {

bool compiled() { return true; }

namespace {

struct MulHiLo {
  __m256i hi;
  __m256i lo;
};

// 32x32 -> 64 products of eight lanes, split into high and low words.
inline MulHiLo mulhilo(__m256i a, __m256i m) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  const __m256i lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0b10101010);
  const __m256i hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0b10101010);
  return {hi, lo};
}

}  // namespace

void philox(const philox::Key& key, const std::uint32_t* c0, const std::uint32_t* c1,
            const std::uint32_t* c2, const std::uint32_t* c3, std::uint32_t* o0,
            std::uint32_t* o1, std::uint32_t* o2, std::uint32_t* o3, std::size_t n) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(philox::kMul0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(philox::kMul1));
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i x0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c0 + i));
    __m256i x1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c1 + i));
    __m256i x2 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c2 + i));
    __m256i x3 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c3 + i));
    std::uint32_t k0 = key[0];
    std::uint32_t k1 = key[1];
    for (int r = 0; r < philox::kRounds; ++r) {
      const MulHiLo p0 = mulhilo(x0, m0);
      const MulHiLo p1 = mulhilo(x2, m1);
      const __m256i kk0 = _mm256_set1_epi32(static_cast<int>(k0));
      const __m256i kk1 = _mm256_set1_epi32(static_cast<int>(k1));
      x0 = _mm256_xor_si256(_mm256_xor_si256(p1.hi, x1), kk0);
      x1 = p1.lo;
      x2 = _mm256_xor_si256(_mm256_xor_si256(p0.hi, x3), kk1);
      x3 = p0.lo;
      k0 += philox::kWeyl0;
      k1 += philox::kWeyl1;
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(o0 + i), x0);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(o1 + i), x1);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(o2 + i), x2);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(o3 + i), x3);
  }
  if (i < n) scalar::philox(key, c0 + i, c1 + i, c2 + i, c3 + i, o0 + i, o1 + i, o2 + i, o3 + i, n - i);
}

void normal_quantile(const double* u, double* z, std::size_t n) {
  using specfun::detail::kCentralDen;
  using specfun::detail::kCentralNum;
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d split = _mm256_set1_pd(specfun::detail::kCentralSplit);
  const __m256d shift = _mm256_set1_pd(specfun::detail::kCentralShift);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(u + i);
    const __m256d q = _mm256_sub_pd(p, half);
    const __m256d central = _mm256_cmp_pd(_mm256_and_pd(q, abs_mask), split, _CMP_LE_OQ);
    const __m256d r = _mm256_sub_pd(shift, _mm256_mul_pd(q, q));
    __m256d num = _mm256_set1_pd(kCentralNum[0]);
    __m256d den = _mm256_set1_pd(kCentralDen[0]);
    for (int k = 1; k < 8; ++k) {
      num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(kCentralNum[k]));
      den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(kCentralDen[k]));
    }
    _mm256_storeu_pd(z + i, _mm256_div_pd(_mm256_mul_pd(q, num), den));
    const int mask = _mm256_movemask_pd(central);
    if (mask != 0xF) {
      for (int l = 0; l < 4; ++l) {
        if (!(mask & (1 << l))) z[i + l] = specfun::normal_quantile(u[i + l]);
      }
    }
  }
  if (i < n) scalar::normal_quantile(u + i, z + i, n - i);
}

void sparse_eval(const SparseEvalPlan& plan, const double* values, const double* points,
                 std::size_t n, double* out) {
  const std::size_t d = plan.dim;
  const std::size_t n_levels = plan.level_offset.size();
  const std::size_t n_terms = plan.coefficient.size();
  // Four lanes per entry, stored as plain doubles.
  thread_local std::vector<double> basis_buf;
  thread_local std::vector<double> prefix_buf;
  thread_local std::vector<std::uint32_t> odo;
  basis_buf.resize(4 * d * plan.dim_stride);
  prefix_buf.resize(4 * (plan.max_active + 1));
  double* const basis = basis_buf.data();
  double* const prefix = prefix_buf.data();
  auto ld = [](const double* q, std::size_t k) { return _mm256_loadu_pd(q + 4 * k); };
  auto st = [](double* q, std::size_t k, __m256d v) { _mm256_storeu_pd(q + 4 * k, v); };
  odo.resize(plan.max_active + 1);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);

  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    const double* x0 = points + p * d;
    for (std::size_t i = 0; i < d; ++i) {
      const __m256d x = _mm256_set_pd(x0[3 * d + i], x0[2 * d + i], x0[d + i], x0[i]);
      const __m256d xi = _mm256_div_pd(_mm256_sub_pd(x, _mm256_set1_pd(plan.center[i])),
                                       _mm256_set1_pd(plan.half_width[i]));
      double* b = basis + 4 * i * plan.dim_stride;
      for (std::size_t k = 0; k < n_levels; ++k) {
        const std::size_t off = plan.level_offset[k];
        const std::size_t m = plan.level_size[k];
        const double* nodes = plan.level_nodes.data() + off;
        const double* w = plan.level_weights.data() + off;
        double* bk = b + 4 * off;
        __m256d s = zero;
        __m256d any_hit = zero;
        for (std::size_t j = 0; j < m; ++j) {
          const __m256d diff = _mm256_sub_pd(xi, _mm256_set1_pd(nodes[j]));
          any_hit = _mm256_or_pd(any_hit, _mm256_cmp_pd(diff, zero, _CMP_EQ_OQ));
          const __m256d q = _mm256_div_pd(_mm256_set1_pd(w[j]), diff);
          st(bk, j, q);
          s = _mm256_add_pd(s, q);
        }
        if (_mm256_movemask_pd(any_hit) == 0) {
          for (std::size_t j = 0; j < m; ++j) st(bk, j, _mm256_div_pd(ld(bk, j), s));
        } else {
          for (std::size_t j = 0; j < m; ++j) {
            const __m256d diff = _mm256_sub_pd(xi, _mm256_set1_pd(nodes[j]));
            const __m256d kron = _mm256_and_pd(_mm256_cmp_pd(diff, zero, _CMP_EQ_OQ), one);
            st(bk, j, _mm256_blendv_pd(_mm256_div_pd(ld(bk, j), s), kron, any_hit));
          }
        }
      }
    }

    __m256d result = zero;
    for (std::size_t t = 0; t < n_terms; ++t) {
      const std::uint32_t a0 = plan.term_active[t];
      const std::size_t na = plan.term_active[t + 1] - a0;
      const std::uint32_t* base = plan.active_base.data() + a0;
      const std::uint32_t* extent = plan.active_extent.data() + a0;
      const std::uint32_t* idx = plan.point_index.data() + plan.term_points[t];
      __m256d acc = zero;
      if (na == 0) {
        acc = _mm256_set1_pd(values[idx[0]]);
      } else {
        st(prefix, 0, one);
        for (std::size_t a = 0; a < na; ++a) {
          odo[a] = 0;
          st(prefix, a + 1, _mm256_mul_pd(ld(prefix, a), ld(basis, base[a])));
        }
        std::size_t flat = 0;
        for (;;) {
          acc = _mm256_add_pd(acc, _mm256_mul_pd(ld(prefix, na), _mm256_set1_pd(values[idx[flat]])));
          ++flat;
          std::size_t k = na;
          while (k > 0) {
            --k;
            if (++odo[k] < extent[k]) break;
            odo[k] = 0;
            if (k == 0) {
              k = na;
              break;
            }
          }
          if (k == na) break;
          for (std::size_t a = k; a < na; ++a) {
            st(prefix, a + 1, _mm256_mul_pd(ld(prefix, a), ld(basis, base[a] + odo[a])));
          }
        }
      }
      result = _mm256_add_pd(result, _mm256_mul_pd(_mm256_set1_pd(plan.coefficient[t]), acc));
    }
    _mm256_storeu_pd(out + p, result);
  }
  if (p < n) scalar::sparse_eval(plan, values, points + p * d, n - p, out + p);
}

}  // namespace pidemc::simd::avx2

#else

#include "pidemc/error.hpp"

namespace pidemc::simd::avx2 {

bool compiled() { return false; }

[[noreturn]] static void unavailable() {
  throw InvalidArgument("AVX2 kernels were not compiled into this build");
}

void philox(const philox::Key&, const std::uint32_t*, const std::uint32_t*,
            const std::uint32_t*, const std::uint32_t*, std::uint32_t*, std::uint32_t*,
            std::uint32_t*, std::uint32_t*, std::size_t) {
  unavailable();
}
void normal_quantile(const double*, double*, std::size_t) { unavailable(); }
void sparse_eval(const SparseEvalPlan&, const double*, const double*, std::size_t, double*) {
  unavailable();
}

}  // namespace pidemc::simd::avx2

#endif
