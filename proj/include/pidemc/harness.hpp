// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment plumbing: run configuration, L2 errors, convergence sweeps,
// reference solutions, CSV / snapshot / manifest I/O.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pidemc/problems.hpp"
#include "pidemc/solver.hpp"

namespace pidemc {

/// `git describe` of the build.
std::string_view build_describe();

/// Flat description of one run. Mirrors the config file and CLI flags.
struct RunConfig {
  std::string problem = "example1";
  int dim = 2;
  // kernel.*; family empty = the problem's own kernel
  std::string kernel_family;
  double alpha = 1.5;
  double beta = 1.0;
  double sigma = 1.0;
  double delta = 0.4;
  // grid.*
  int level = 3;
  std::optional<std::pair<double, double>> box;  // [lo, hi] per axis
  // solver.*
  double dt = 1.0 / 32;
  int n_steps = 0;  // 0: T / dt
  int m_paths = 10000;
  std::uint32_t max_jumps = 1;
  ExteriorPolicy exterior = ExteriorPolicy::Clamp;
  int retain_last = 0;
  std::uint64_t seed = 0;
  // error.*
  int n_eval = 100000;
  std::uint64_t eval_seed = 20260101;
};

/// Applies a JSON document (nested {"solver": {"dt": ..}} or dotted
/// {"solver.dt": ..} keys). Unknown keys throw InvalidArgument.
void apply_config_json(RunConfig& config, std::string_view json_text);
RunConfig load_config_file(const std::filesystem::path& path);

ProblemSpec build_problem(const RunConfig& config);
SolverConfig solver_config(const RunConfig& config, double T);

/// key = value lines, stable order.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config);

struct ErrorReport {
  double l2_error = 0.0;
  int n_eval_points = 0;
  std::uint64_t eval_seed = 0;
  std::string config_echo;
};

/// sqrt(|Omega| / n sum_k (u(x_k) - ref(x_k))^2) over n uniform points of the
/// problem box drawn from eval_seed.
ErrorReport l2_error(const ProblemSpec& problem, const SolutionSnapshot& final_snapshot,
                     const std::function<double(std::span<const double>)>& reference, int n_eval,
                     std::uint64_t eval_seed);
ErrorReport l2_error(const ProblemSpec& problem, const SolutionSnapshot& final_snapshot,
                     const SparseInterpolant& reference, int n_eval, std::uint64_t eval_seed);

enum class SweepAxis { Dt, Paths };
std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(y) on log(x).
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct SweepPoint {
  double value = 0.0;
  double l2_error = 0.0;
  double rate = 0.0;  // log(e_{k-1}/e_k) / log(v_{k-1}/v_k); NaN for k = 0
  bool ok = true;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::Dt;
  std::vector<SweepPoint> points;
  double fitted_slope = 0.0;  // NaN with fewer than 3 usable points
  double fit_r2 = 0.0;
  bool complete = true;
  std::string failure;  // first failure message when !complete
};

/// Error for one sweep value.
using SweepEvaluator = std::function<double(double value)>;

/// Evaluates every value (up to `jobs` concurrently) and fits. A failure
/// stops scheduling further values; completed points are kept, the rest
/// are flagged !ok.
SweepResult run_sweep(SweepAxis axis, const std::vector<double>& values,
                      const SweepEvaluator& evaluator, int jobs = 1);

/// Sweep over solves of `base`. The error is against the exact solution, or
/// against `reference` when given. With replicates > 1 the error is the mean
/// over seeds base.seed + r.
SweepResult run_sweep(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                      const SparseInterpolant* reference = nullptr, int replicates = 1,
                      int jobs = 1);

/// Final snapshot of a fine solve.
SolutionSnapshot reference_solution(const ProblemSpec& problem, const SolverConfig& fine);

// ---- files ----

struct StoredSnapshot {
  std::int64_t dim = 0;
  std::int64_t level = 0;
  std::vector<double> coordinates;  // n x d
  std::vector<double> values;
};

/// Little-endian: int64 d, int64 level, int64 n, n*d float64 coordinates,
/// n float64 values.
void write_snapshot(const std::filesystem::path& path, const SolutionSnapshot& snapshot);
StoredSnapshot read_snapshot(const std::filesystem::path& path);

/// Interpolant over the stored values; the grid is rebuilt on `box` and must
/// match the stored coordinates exactly.
SparseInterpolant load_interpolant(const StoredSnapshot& stored, const Box& box,
                                   ExteriorPolicy policy = ExteriorPolicy::Clamp);

/// Plain-text manifest: config lines, git describe, then `extra`.
void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});
std::vector<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path);
/// Inverse of describe() for a manifest written by write_manifest.
RunConfig config_from_manifest(const std::vector<std::pair<std::string, std::string>>& lines);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // empty cells read back as NaN
};

/// Shortest round-trip decimal; NaN is written as an empty cell.
std::string format_double(double v);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// (dt | paths, l2_error, rate).
CsvTable to_csv(const SweepResult& result);
/// (dt, l2_error, rate) single row, rate empty.
CsvTable to_csv(const ErrorReport& report, double dt);

}  // namespace pidemc
