// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/solver.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>

#include "pidemc/error.hpp"
#include "pidemc/sde.hpp"

namespace pidemc {

namespace {

constexpr std::size_t kChunk = 256;

// Neumaier compensated sum.
struct CompSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  void add(const CompSum& o) {
    add(o.sum);
    comp += o.comp;
  }
  double value() const { return sum + comp; }
};

// Fixed-shape pairwise reduction over [lo, hi).
CompSum pairwise(const CompSum* parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  CompSum a = pairwise(parts, lo, mid);
  a.add(pairwise(parts, mid, hi));
  return a;
}

int effective_retention(const SolverConfig& c) {
  if (c.retain_last > 0) return c.retain_last;
  return c.n_steps <= 256 ? c.n_steps + 1 : 8;
}

struct WorkItem {
  std::uint32_t node;
  std::uint32_t first_path;
  std::uint32_t count;
};

}  // namespace

StepStats& StepStats::operator+=(const StepStats& o) {
  paths += o.paths;
  exits += o.exits;
  overshoot += o.overshoot;
  jumps += o.jumps;
  truncated += o.truncated;
  boundary_nodes += o.boundary_nodes;
  return *this;
}

int steps_for(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) detail::throw_invalid("dt must be finite and > 0");
  const double n = std::round(T / dt);
  if (n < 1 || std::abs(n * dt - T) > 1e-12) {
    detail::throw_invalid("dt = " + std::to_string(dt) + " does not divide T = " +
                          std::to_string(T));
  }
  return static_cast<int>(n);
}

void validate(const SolverConfig& c, const ProblemSpec& p) {
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) detail::throw_invalid("solver.dt must be > 0");
  if (c.n_steps < 1) detail::throw_invalid("solver.n_steps must be >= 1");
  if (c.m_paths < 1) detail::throw_invalid("solver.m_paths must be >= 1");
  if (c.grid_level < 1) detail::throw_invalid("grid.level must be >= 1");
  if (c.retain_last < 0) detail::throw_invalid("retain_last must be >= 0");
  if (std::abs(c.dt * c.n_steps - p.T) > 1e-12) {
    detail::throw_invalid("solver.dt * solver.n_steps must equal T = " + std::to_string(p.T));
  }
  if (!p.coeffs || p.coeffs->dimension() != p.dim ||
      p.box.dimension() != static_cast<std::size_t>(p.dim)) {
    detail::throw_invalid("problem '" + p.name + "' is inconsistent");
  }
}

SolutionSnapshot initialize(const ProblemSpec& problem, const SolverConfig& config) {
  validate(config, problem);
  auto design = build_grid(problem.dim, config.grid_level, problem.box);
  std::vector<double> values(design->size());
  for (std::size_t l = 0; l < values.size(); ++l) {
    values[l] = problem.coeffs->initial(design->point(l));
    if (!std::isfinite(values[l])) {
      throw NumericFailure("u0 is not finite at grid node " + std::to_string(l));
    }
  }
  SolutionSnapshot s;
  s.step_index = 0;
  s.time = 0.0;
  s.interpolant = std::make_shared<const SparseInterpolant>(design, values, config.exterior_policy);
  s.node_values = std::move(values);
  return s;
}

SolutionSnapshot advance_step(const ProblemSpec& problem, const SolverConfig& config,
                              const SolutionSnapshot& prev, const StreamKey& key_base,
                              StepStats* stats) {
  if (!prev.interpolant) detail::throw_invalid("advance_step: previous snapshot was pruned");
  const SparseInterpolant& I = *prev.interpolant;
  const SparseGridDesign& design = I.design();
  const auto d = static_cast<std::size_t>(problem.dim);
  if (design.dimension() != problem.dim) {
    detail::throw_invalid("advance_step: snapshot dimension does not match the problem");
  }
  const CoefficientSet& coeffs = *problem.coeffs;
  const Box& box = problem.box;
  const KernelSpec* kernel = problem.kernel_ptr();
  const double dt = config.dt;
  const int step = prev.step_index + 1;
  const double t_prev = prev.time;
  const double t_next = static_cast<double>(step) * dt;
  const double collar = kernel ? kernel->delta() : 0.0;
  const auto M = static_cast<std::size_t>(config.m_paths);
  const std::size_t n_nodes = design.size();
  const std::size_t chunks = (M + kChunk - 1) / kChunk;

  std::vector<double> values(n_nodes, 0.0);
  std::vector<WorkItem> work;
  StepStats st;
  for (std::size_t l = 0; l < n_nodes; ++l) {
    if (!in_domain(box, design.point(l))) {
      values[l] = coeffs.boundary(t_next, design.point(l));
      if (!std::isfinite(values[l])) {
        throw NumericFailure("g is not finite at boundary node " + std::to_string(l) +
                             ", step " + std::to_string(step));
      }
      ++st.boundary_nodes;
      continue;
    }
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t first = c * kChunk;
      work.push_back({static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(first),
                      static_cast<std::uint32_t>(std::min(kChunk, M - first))});
    }
  }

  std::vector<CompSum> partial(work.size());
  std::vector<StepStats> item_stats(work.size());
  std::exception_ptr failure;
  std::size_t failure_item = std::numeric_limits<std::size_t>::max();
  std::mutex failure_mutex;

  const auto n_work = static_cast<std::int64_t>(work.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t w = 0; w < n_work; ++w) {
    const auto wi = static_cast<std::size_t>(w);
    try {
      const WorkItem& item = work[wi];
      const auto x = design.point(item.node);
      const StepContext ctx(coeffs, kernel, box, x, t_prev, dt, config.max_jumps);
      const std::size_t n = item.count;
      thread_local std::vector<double> xe, ival;
      thread_local std::vector<std::uint8_t> exited;
      thread_local std::vector<std::uint32_t> jumps;
      xe.resize(n * d);
      ival.resize(n);
      exited.resize(n);
      jumps.resize(n);
      step_paths(ctx, box, key_base.step_index, item.node, item.first_path, n,
                 key_base.master_seed, xe.data(), exited.data(), jumps.data());
      I.eval_batch(std::span<const double>(xe.data(), n * d), std::span<double>(ival.data(), n));

      CompSum acc;
      StepStats& s = item_stats[wi];
      for (std::size_t p = 0; p < n; ++p) {
        const std::span<const double> X(xe.data() + p * d, d);
        const double u_prev = ival[p];
        double S;
        if (exited[p]) {
          S = coeffs.boundary(t_next, X);
          ++s.exits;
          if (box.distance(X) > collar) ++s.overshoot;
        } else {
          S = u_prev;
        }
        S += dt * coeffs.forcing(t_prev, X, u_prev);
        if (!std::isfinite(S)) {
          throw NumericFailure("non-finite path functional at step " + std::to_string(step) +
                               ", node " + std::to_string(item.node) + ", path " +
                               std::to_string(item.first_path + p));
        }
        acc.add(S);
        s.jumps += jumps[p];
        if (jumps[p] > config.max_jumps) ++s.truncated;
      }
      s.paths = n;
      partial[wi] = acc;
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (wi < failure_item) {
        failure_item = wi;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Work items of one node are contiguous and in path order.
  std::size_t w = 0;
  while (w < work.size()) {
    std::size_t e = w;
    while (e < work.size() && work[e].node == work[w].node) ++e;
    const CompSum total = pairwise(partial.data(), w, e);
    values[work[w].node] = total.value() / static_cast<double>(M);
    w = e;
  }
  for (const auto& s : item_stats) st += s;
  if (stats) *stats = st;

  SolutionSnapshot out;
  out.step_index = step;
  out.time = t_next;
  out.interpolant =
      std::make_shared<const SparseInterpolant>(I.design_ptr(), values, config.exterior_policy);
  out.node_values = std::move(values);
  return out;
}

std::vector<SolutionSnapshot> solve(const ProblemSpec& problem, const SolverConfig& config,
                                    StepStats* total, const StepCallback& on_step) {
  validate(config, problem);
  const int keep = effective_retention(config);
  std::vector<SolutionSnapshot> snaps;
  snaps.reserve(static_cast<std::size_t>(config.n_steps) + 1);
  snaps.push_back(initialize(problem, config));
  StepStats sum;
  for (int i = 1; i <= config.n_steps; ++i) {
    StepStats st;
    const StreamKey key{static_cast<std::uint32_t>(i), 0, 0, config.master_seed};
    snaps.push_back(advance_step(problem, config, snaps.back(), key, &st));
    sum += st;
    if (on_step) on_step(snaps.back(), st);
    const int drop = i - keep;  // index leaving the retention window
    if (drop >= 0) {
      SolutionSnapshot& old = snaps[static_cast<std::size_t>(drop)];
      old.interpolant.reset();
      old.node_values.clear();
      old.node_values.shrink_to_fit();
    }
  }
  if (total) *total = sum;
  return snaps;
}

}  // namespace pidemc
