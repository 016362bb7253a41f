// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Implicit-explicit sparse-grid Monte Carlo time stepping. Per step i and
// grid node x_l, M paths X_j are simulated over [t_{i-1}, t_i] and
//   S_j = I[u^{i-1}](X_j) 1{X_j in Omega} + g(t_i, X_j) 1{X_j not in Omega}
//         + dt f(t_{i-1}, X_j, I[u^{i-1}](X_j)),
//   u^i(x_l) = (1/M) sum_j S_j.
// Nodes on the box boundary (not in the open domain) take g(t_i, x_l).
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pidemc/problems.hpp"
#include "pidemc/rng.hpp"
#include "pidemc/sparse_grid.hpp"

namespace pidemc {

struct SolverConfig {
  double dt = 0.0;
  int n_steps = 0;
  int m_paths = 0;
  int grid_level = 3;
  std::uint32_t max_jumps = 1;
  ExteriorPolicy exterior_policy = ExteriorPolicy::Clamp;
  std::uint64_t master_seed = 0;
  /// Keep node values and interpolants for the last K snapshots only;
  /// 0 = all when n_steps <= 256, otherwise the last 8. The final snapshot
  /// is always kept.
  int retain_last = 0;
};

/// Throws InvalidArgument on an inconsistent config (dt * n_steps != T, ...).
void validate(const SolverConfig& config, const ProblemSpec& problem);

/// Steps for a given dt: round(T / dt), validated.
int steps_for(double T, double dt);

struct SolutionSnapshot {
  int step_index = 0;
  double time = 0.0;
  std::vector<double> node_values;                       // empty once pruned
  std::shared_ptr<const SparseInterpolant> interpolant;  // null once pruned

  bool retained() const { return static_cast<bool>(interpolant); }
};

struct StepStats {
  std::uint64_t paths = 0;
  std::uint64_t exits = 0;      // path ended outside the open box
  std::uint64_t overshoot = 0;  // ... and beyond the delta collar
  std::uint64_t jumps = 0;      // sampled Poisson counts, summed
  std::uint64_t truncated = 0;  // paths with N > max_jumps
  std::uint64_t boundary_nodes = 0;

  StepStats& operator+=(const StepStats& o);
};

SolutionSnapshot initialize(const ProblemSpec& problem, const SolverConfig& config);

/// Snapshot at t_i from the one at t_{i-1}. key_base supplies the step index
/// (i) and the master seed; node and path indices are filled in.
SolutionSnapshot advance_step(const ProblemSpec& problem, const SolverConfig& config,
                              const SolutionSnapshot& prev, const StreamKey& key_base,
                              StepStats* stats = nullptr);

using StepCallback = std::function<void(const SolutionSnapshot&, const StepStats&)>;

/// N + 1 snapshots, t = 0 .. T.
std::vector<SolutionSnapshot> solve(const ProblemSpec& problem, const SolverConfig& config,
                                    StepStats* total = nullptr, const StepCallback& on_step = {});

}  // namespace pidemc
