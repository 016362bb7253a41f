// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/sparse_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "pidemc/error.hpp"

namespace pidemc {

namespace {

constexpr int kMaxLevel = 20;

int count_1d(int l) { return l == 1 ? 1 : (1 << (l - 1)) + 1; }

// -cos(pi j / (m - 1)) written as a sine so the center is exactly 0 and the
// set is exactly symmetric; nested levels produce bit-identical values.
double cgl_node(int j, int m) {
  if (m == 1) return 0.0;
  const double num = static_cast<double>(2 * j - (m - 1));
  return std::sin(std::numbers::pi * num / (2.0 * (m - 1)));
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

// Compositions of `excess` into d nonnegative parts, lexicographic.
void compositions(int d, int excess, std::vector<int>& cur, int pos,
                  std::vector<std::vector<int>>& out) {
  if (pos == d - 1) {
    cur[pos] = excess;
    out.push_back(cur);
    return;
  }
  for (int e = excess; e >= 0; --e) {
    cur[pos] = e;
    compositions(d, excess - e, cur, pos + 1, out);
  }
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint32_t v : k) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

Level1D nodes_1d(int l) {
  if (l < 1 || l > kMaxLevel) {
    detail::throw_invalid("nodes_1d: level must lie in [1, " + std::to_string(kMaxLevel) + "]");
  }
  Level1D out;
  out.l = l;
  out.m = count_1d(l);
  out.nodes.resize(static_cast<std::size_t>(out.m));
  for (int j = 0; j < out.m; ++j) out.nodes[static_cast<std::size_t>(j)] = cgl_node(j, out.m);
  return out;
}

std::vector<double> barycentric_weights_1d(int l) {
  const int m = nodes_1d(l).m;
  std::vector<double> w(static_cast<std::size_t>(m), 1.0);
  for (int j = 0; j < m; ++j) w[static_cast<std::size_t>(j)] = (j % 2 == 0) ? 1.0 : -1.0;
  if (m > 1) {
    w.front() *= 0.5;
    w.back() *= 0.5;
  }
  return w;
}

std::vector<SmolyakTerm> enumerate_terms(int d, int m) {
  if (d < 1) detail::throw_invalid("enumerate_terms: d must be >= 1");
  if (m < d) detail::throw_invalid("enumerate_terms: m must be >= d");
  const int q = m - d;  // maximal excess sum(l_i - 1)
  if (q + 1 > kMaxLevel) detail::throw_invalid("enumerate_terms: level too large");
  std::vector<SmolyakTerm> terms;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  for (int e = std::max(0, q - d + 1); e <= q; ++e) {
    const double sign = ((q - e) % 2 == 0) ? 1.0 : -1.0;
    const double coeff = sign * binomial(d - 1, q - e);
    std::vector<std::vector<int>> comps;
    compositions(d, e, cur, 0, comps);
    for (auto& c : comps) {
      SmolyakTerm t;
      t.levels.resize(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) t.levels[i] = c[i] + 1;
      t.coefficient = coeff;
      terms.push_back(std::move(t));
    }
  }
  return terms;
}

std::string_view to_string(ExteriorPolicy policy) {
  return policy == ExteriorPolicy::Clamp ? "clamp" : "extrapolate";
}

ExteriorPolicy parse_exterior_policy(std::string_view name) {
  if (name == "clamp") return ExteriorPolicy::Clamp;
  if (name == "extrapolate") return ExteriorPolicy::Extrapolate;
  detail::throw_invalid("unknown exterior policy '" + std::string(name) +
                        "' (expected clamp|extrapolate)");
}

std::span<const double> SparseGridDesign::point(std::size_t i) const {
  const auto d = static_cast<std::size_t>(dim_);
  return {coords_.data() + i * d, d};
}

std::span<const std::uint32_t> SparseGridDesign::index_key(std::size_t i) const {
  const auto d = static_cast<std::size_t>(dim_);
  return {keys_.data() + i * d, d};
}

std::shared_ptr<const SparseGridDesign> build_grid(int d, int level, const Box& box) {
  if (d < 1) detail::throw_invalid("build_grid: d must be >= 1");
  if (level < 1 || level > kMaxLevel) detail::throw_invalid("build_grid: level out of range");
  if (box.dimension() != static_cast<std::size_t>(d)) {
    detail::throw_invalid("build_grid: box dimension does not match d");
  }
  auto design = std::shared_ptr<SparseGridDesign>(new SparseGridDesign());
  design->dim_ = d;
  design->level_ = level;
  design->box_ = box;
  design->terms_ = enumerate_terms(d, d + level - 1);

  const auto ud = static_cast<std::size_t>(d);
  const int m_fine = count_1d(level);
  const Level1D fine = nodes_1d(level);
  const std::uint32_t center_index = static_cast<std::uint32_t>((m_fine - 1) / 2);

  // Plan: 1-D blocks for levels 2..level.
  simd::SparseEvalPlan& plan = design->plan_;
  plan.dim = ud;
  plan.center.resize(ud);
  plan.half_width.resize(ud);
  for (std::size_t i = 0; i < ud; ++i) {
    plan.center[i] = box.center(i);
    plan.half_width[i] = box.half_width(i);
  }
  std::uint32_t offset = 0;
  for (int l = 2; l <= level; ++l) {
    const Level1D lv = nodes_1d(l);
    const auto w = barycentric_weights_1d(l);
    plan.level_offset.push_back(offset);
    plan.level_size.push_back(static_cast<std::uint32_t>(lv.m));
    plan.level_nodes.insert(plan.level_nodes.end(), lv.nodes.begin(), lv.nodes.end());
    plan.level_weights.insert(plan.level_weights.end(), w.begin(), w.end());
    offset += static_cast<std::uint32_t>(lv.m);
  }
  plan.dim_stride = offset;

  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, KeyHash> lookup;
  auto& keys = design->keys_;
  auto intern = [&](const std::vector<std::uint32_t>& key) {
    auto [it, inserted] = lookup.try_emplace(key, static_cast<std::uint32_t>(lookup.size()));
    if (inserted) keys.insert(keys.end(), key.begin(), key.end());
    return it->second;
  };

  plan.term_active.push_back(0);
  plan.term_points.push_back(0);
  std::vector<std::uint32_t> key(ud);
  std::vector<std::size_t> active;
  std::vector<std::uint32_t> odo;
  for (const SmolyakTerm& term : design->terms_) {
    active.clear();
    for (std::size_t i = 0; i < ud; ++i) {
      if (term.levels[i] >= 2) active.push_back(i);
    }
    plan.coefficient.push_back(term.coefficient);
    for (std::size_t i : active) {
      const int l = term.levels[i];
      plan.active_base.push_back(static_cast<std::uint32_t>(i * plan.dim_stride) +
                                 plan.level_offset[static_cast<std::size_t>(l - 2)]);
      plan.active_extent.push_back(static_cast<std::uint32_t>(count_1d(l)));
    }
    plan.term_active.push_back(static_cast<std::uint32_t>(plan.active_base.size()));
    plan.max_active = std::max(plan.max_active, active.size());

    // Tensor points, last active dimension fastest.
    std::fill(key.begin(), key.end(), center_index);
    odo.assign(active.size(), 0);
    for (;;) {
      for (std::size_t a = 0; a < active.size(); ++a) {
        const int l = term.levels[active[a]];
        key[active[a]] = odo[a] << (level - l);
      }
      plan.point_index.push_back(intern(key));
      std::size_t k = active.size();
      bool done = true;
      while (k > 0) {
        --k;
        if (++odo[k] < static_cast<std::uint32_t>(count_1d(term.levels[active[k]]))) {
          done = false;
          break;
        }
        odo[k] = 0;
      }
      if (done) break;
    }
    plan.term_points.push_back(static_cast<std::uint32_t>(plan.point_index.size()));
  }

  design->n_points_ = lookup.size();
  design->coords_.resize(design->n_points_ * ud);
  for (std::size_t p = 0; p < design->n_points_; ++p) {
    for (std::size_t i = 0; i < ud; ++i) {
      const double xi = fine.nodes[keys[p * ud + i]];
      design->coords_[p * ud + i] = box.center(i) + box.half_width(i) * xi;
    }
  }
  return design;
}

SparseInterpolant::SparseInterpolant(std::shared_ptr<const SparseGridDesign> design,
                                     std::vector<double> values, ExteriorPolicy policy)
    : design_(std::move(design)), values_(std::move(values)), policy_(policy) {
  if (!design_) detail::throw_invalid("fit: null design");
  if (values_.size() != design_->size()) {
    detail::throw_invalid("fit: expected " + std::to_string(design_->size()) + " values, got " +
                          std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      detail::throw_invalid("fit: non-finite value at point " + std::to_string(i));
    }
  }
  offset_ = values_.empty() ? 0.0 : values_[0];
  shifted_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) shifted_[i] = values_[i] - offset_;
}

double SparseInterpolant::eval(std::span<const double> x) const {
  double out = 0.0;
  eval_batch(x, std::span<double>(&out, 1));
  return out;
}

void SparseInterpolant::eval_batch(std::span<const double> points, std::span<double> out) const {
  const auto d = static_cast<std::size_t>(design_->dimension());
  if (points.size() != out.size() * d) {
    detail::throw_invalid("eval_batch: points size does not match out size * d");
  }
  const Box& box = design_->box();
  bool outside = false;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double v = points[k];
    if (!std::isfinite(v)) detail::throw_invalid("eval: non-finite coordinate");
    const std::size_t i = k % d;
    if (v < box.lower(i) || v > box.upper(i)) outside = true;
  }
  const double* src = points.data();
  thread_local std::vector<double> projected;
  if (outside && policy_ == ExteriorPolicy::Clamp) {
    projected.assign(points.begin(), points.end());
    for (std::size_t p = 0; p < out.size(); ++p) {
      box.clamp(std::span<double>(projected.data() + p * d, d));
    }
    src = projected.data();
  }
  simd::kernels().sparse_eval(design_->plan(), shifted_.data(), src, out.size(), out.data());
  for (double& v : out) v += offset_;
}

SparseInterpolant fit(std::shared_ptr<const SparseGridDesign> design, std::vector<double> values,
                      ExteriorPolicy policy) {
  return SparseInterpolant(std::move(design), std::move(values), policy);
}

}  // namespace pidemc
