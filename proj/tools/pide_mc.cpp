// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// pide-mc: batch front end for the sparse-grid Monte Carlo solver.
#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pidemc/error.hpp"
#include "pidemc/harness.hpp"
#include "pidemc/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace pidemc;

namespace {

constexpr int kMaxShortDim = 20;

struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> problem, kernel, exterior;
  std::optional<int> dim, steps, paths, level, n_eval, retain;
  std::optional<double> alpha, beta, sigma, delta, dt, box;
  std::optional<std::uint32_t> max_jumps;
  std::optional<std::uint64_t> seed, eval_seed;
  std::string out = ".";
  bool long_run = false;
  bool quiet = false;
  int jobs = 1;
  int threads = 0;
};

// Accepts plain numbers and powers written as 2^-3.
double parse_value(const std::string& s) {
  const auto caret = s.find('^');
  try {
    if (caret == std::string::npos) return std::stod(s);
    return std::pow(std::stod(s.substr(0, caret)), std::stod(s.substr(caret + 1)));
  } catch (const std::exception&) {
    detail::throw_invalid("bad numeric value '" + s + "'");
  }
}

void add_run_flags(CLI::App* app, Flags& f) {
  app->add_option("--problem", f.problem, "example1 | example2 | example3");
  app->add_option("--dim", f.dim, "spatial dimension");
  app->add_option("--kernel", f.kernel, "override kernel: constant|hypersingular|tempered|gaussian");
  app->add_option("--alpha", f.alpha, "kernel alpha");
  app->add_option("--beta", f.beta, "tempered kernel beta");
  app->add_option("--sigma", f.sigma, "gaussian kernel sigma");
  app->add_option("--delta", f.delta, "interaction radius");
  app->add_option("--box", f.box, "box half-width (default 1)");
  app->add_option_function<std::string>(
      "--dt", [&f](const std::string& v) {
        try {
          f.dt = parse_value(v);
        } catch (const InvalidArgument& e) {
          throw CLI::ValidationError("--dt", e.what());
        }
      }, "time step, e.g. 0.01 or 2^-6");
  app->add_option("--steps", f.steps, "number of steps (default T/dt)");
  app->add_option("--paths", f.paths, "paths per node and step");
  app->add_option("--level", f.level, "sparse grid level");
  app->add_option("--max-jumps", f.max_jumps, "jumps applied per step (default 1)");
  app->add_option("--exterior", f.exterior, "interpolant outside the box: clamp|extrapolate");
  app->add_option("--retain", f.retain, "snapshots kept in memory (0 = auto)");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--n-eval", f.n_eval, "points for the L2 error");
  app->add_option("--eval-seed", f.eval_seed, "seed of the error points");
  app->add_option("--out", f.out, "output directory");
}

RunConfig resolve(const Flags& f) {
  RunConfig c = f.config_file ? load_config_file(*f.config_file) : RunConfig{};
  if (f.problem) c.problem = *f.problem;
  if (f.long_run && !f.dim && c.problem != "example1") c.dim = 100;
  if (f.dim) c.dim = *f.dim;
  if (f.kernel) c.kernel_family = *f.kernel;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.beta) c.beta = *f.beta;
  if (f.sigma) c.sigma = *f.sigma;
  if (f.delta) c.delta = *f.delta;
  if (f.box) c.box = std::pair{-*f.box, *f.box};
  if (f.dt) {
    c.dt = *f.dt;
    if (!f.steps) c.n_steps = 0;
  }
  if (f.steps) c.n_steps = *f.steps;
  if (f.paths) c.m_paths = *f.paths;
  if (f.level) c.level = *f.level;
  if (f.max_jumps) c.max_jumps = *f.max_jumps;
  if (f.exterior) c.exterior = parse_exterior_policy(*f.exterior);
  if (f.retain) c.retain_last = *f.retain;
  if (f.seed) c.seed = *f.seed;
  if (f.n_eval) c.n_eval = *f.n_eval;
  if (f.eval_seed) c.eval_seed = *f.eval_seed;
  if (c.dim > kMaxShortDim && !f.long_run) {
    detail::throw_invalid("dim " + std::to_string(c.dim) + " > " + std::to_string(kMaxShortDim) +
                          " needs --long");
  }
  return c;
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = list.find(',', start);
    out.push_back(parse_value(list.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool g_quiet = false;

__attribute__((format(printf, 1, 2))) void note(const char* fmt, ...) {
  if (g_quiet) return;
  va_list ap;
  va_start(ap, fmt);
  std::vfprintf(stderr, fmt, ap);
  va_end(ap);
}

std::vector<std::pair<std::string, std::string>> stats_lines(const StepStats& s) {
  return {{"stats.paths", std::to_string(s.paths)},
          {"stats.exits", std::to_string(s.exits)},
          {"stats.overshoot", std::to_string(s.overshoot)},
          {"stats.jumps", std::to_string(s.jumps)},
          {"stats.truncated", std::to_string(s.truncated)},
          {"stats.boundary_nodes", std::to_string(s.boundary_nodes)}};
}

struct Reference {
  RunConfig config;
  SparseInterpolant interpolant;
};

Reference load_reference(const fs::path& dir, const ProblemSpec& problem) {
  const RunConfig rc = config_from_manifest(read_manifest(dir / "manifest.txt"));
  const StoredSnapshot st = read_snapshot(dir / "reference.bin");
  if (st.dim != problem.dim) {
    detail::throw_invalid("reference dimension " + std::to_string(st.dim) +
                          " does not match --dim " + std::to_string(problem.dim));
  }
  return {rc, load_interpolant(st, problem.box, rc.exterior)};
}

int cmd_solve(const Flags& f, const std::optional<std::string>& ref_dir) {
  const RunConfig c = resolve(f);
  const ProblemSpec p = build_problem(c);
  const SolverConfig sc = solver_config(c, p.T);
  fs::create_directories(f.out);
  note("solve %s d=%d dt=%g steps=%d paths=%d level=%d seed=%llu threads=%d simd=%s\n",
      p.name.c_str(), p.dim, sc.dt, sc.n_steps, sc.m_paths, sc.grid_level,
      static_cast<unsigned long long>(sc.master_seed), omp_get_max_threads(),
      std::string(simd::name(simd::active())).c_str());
  const auto t0 = std::chrono::steady_clock::now();
  StepStats total;
  auto progress = [&](const SolutionSnapshot& s, const StepStats&) {
    if (sc.n_steps >= 8 && s.step_index % (sc.n_steps / 8) == 0) {
      note("  step %d/%d\n", s.step_index, sc.n_steps);
    }
  };
  SolverConfig run = sc;
  if (run.retain_last == 0) run.retain_last = 1;
  const auto snaps = solve(p, run, &total, progress);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const SolutionSnapshot& fin = snaps.back();
  write_snapshot(fs::path(f.out) / "snapshot.bin", fin);

  auto extra = stats_lines(total);
  extra.emplace_back("run.seconds", format_double(secs));
  extra.emplace_back("grid.points", std::to_string(fin.node_values.size()));
  std::optional<ErrorReport> err;
  if (ref_dir) {
    const Reference ref = load_reference(*ref_dir, p);
    err = l2_error(p, fin, ref.interpolant, c.n_eval, c.eval_seed);
    extra.emplace_back("error.reference", *ref_dir);
  } else if (p.has_exact()) {
    const double T = fin.time;
    err = l2_error(p, fin, [&](std::span<const double> x) { return p.exact(T, x); }, c.n_eval,
                   c.eval_seed);
    extra.emplace_back("error.reference", "exact");
  }
  if (err) {
    write_csv(fs::path(f.out) / "errors.csv", to_csv(*err, sc.dt));
    extra.emplace_back("result.l2_error", format_double(err->l2_error));
    std::printf("l2_error %s\n", format_double(err->l2_error).c_str());
  } else {
    note("no exact solution: errors.csv not written (use --reference DIR)\n");
  }
  write_manifest(fs::path(f.out) / "manifest.txt", c, extra);
  note("done in %.2f s, %llu paths, %llu exits, %llu truncated jump counts\n", secs,
      static_cast<unsigned long long>(total.paths), static_cast<unsigned long long>(total.exits),
      static_cast<unsigned long long>(total.truncated));
  return 0;
}

int cmd_sweep(const Flags& f, const std::string& axis_name, const std::string& values_text,
              int replicates, const std::optional<std::string>& ref_dir) {
  const RunConfig c = resolve(f);
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const auto values = parse_values(values_text);
  const ProblemSpec p = build_problem(c);
  std::optional<Reference> ref;
  auto extra = std::vector<std::pair<std::string, std::string>>{
      {"sweep.axis", std::string(to_string(axis))},
      {"sweep.values", values_text},
      {"sweep.replicates", std::to_string(replicates)}};
  if (ref_dir) {
    ref.emplace(load_reference(*ref_dir, p));
    if (axis == SweepAxis::Dt) {
      for (double v : values) {
        if (!(v > ref->config.dt)) {
          detail::throw_invalid("sweep value " + format_double(v) +
                                " is not coarser than the reference dt " +
                                format_double(ref->config.dt));
        }
      }
    }
    extra.emplace_back("error.reference", *ref_dir);
  }
  fs::create_directories(f.out);
  note("sweep %s over %s (%zu values, %d replicates, jobs=%d)\n", p.name.c_str(),
      std::string(to_string(axis)).c_str(), values.size(), replicates, f.jobs);
  const auto r = run_sweep(c, axis, values, ref ? &ref->interpolant : nullptr, replicates, f.jobs);
  write_csv(fs::path(f.out) / "sweep.csv", to_csv(r));
  extra.emplace_back("result.slope", format_double(r.fitted_slope));
  extra.emplace_back("result.r2", format_double(r.fit_r2));
  extra.emplace_back("result.complete", r.complete ? "true" : "false");
  if (!r.complete) extra.emplace_back("result.failure", r.failure);
  write_manifest(fs::path(f.out) / "manifest.txt", c, extra);

  std::printf("%-14s %-24s %s\n", std::string(to_string(axis)).c_str(), "l2_error", "rate");
  for (const auto& pt : r.points) {
    std::printf("%-14s %-24s %s\n", format_double(pt.value).c_str(),
                pt.ok ? format_double(pt.l2_error).c_str() : "failed",
                format_double(pt.rate).c_str());
  }
  std::printf("slope %s r2 %s\n", format_double(r.fitted_slope).c_str(),
              format_double(r.fit_r2).c_str());
  if (!r.complete) {
    std::fprintf(stderr, "sweep aborted: %s\n", r.failure.c_str());
    return 3;
  }
  return 0;
}

int cmd_reference(const Flags& f) {
  const RunConfig c = resolve(f);
  const ProblemSpec p = build_problem(c);
  const SolverConfig sc = solver_config(c, p.T);
  fs::create_directories(f.out);
  note("reference %s d=%d dt=%g paths=%d level=%d\n", p.name.c_str(), p.dim, sc.dt, sc.m_paths,
      sc.grid_level);
  const auto t0 = std::chrono::steady_clock::now();
  const SolutionSnapshot s = reference_solution(p, sc);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_snapshot(fs::path(f.out) / "reference.bin", s);
  write_manifest(fs::path(f.out) / "manifest.txt", c,
                 {{"run.seconds", format_double(secs)},
                  {"grid.points", std::to_string(s.node_values.size())}});
  note("reference written to %s in %.2f s\n", f.out.c_str(), secs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-grid Monte Carlo solver for semi-linear nonlocal PIDEs"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config_file, "JSON config; flags override it")
      ->check(CLI::ExistingFile);
  app.add_flag("--long", f.long_run, "allow the 100-d settings (default dim 100 for example2/3)");
  app.add_option("--jobs", f.jobs, "concurrent solves in a sweep")->check(CLI::PositiveNumber);
  app.add_option("--threads", f.threads, "worker threads (default: OpenMP default)");
  app.add_flag("-q,--quiet", f.quiet, "no progress output");
  app.set_version_flag("--version", std::string(build_describe()));

  auto* solve_cmd = app.add_subcommand("solve", "run one solve");
  add_run_flags(solve_cmd, f);
  std::optional<std::string> solve_ref;
  solve_cmd->add_option("--reference", solve_ref, "reference directory for the error");

  auto* sweep_cmd = app.add_subcommand("sweep", "convergence sweep over dt or paths");
  add_run_flags(sweep_cmd, f);
  std::string axis = "dt", values;
  int replicates = 1;
  std::optional<std::string> sweep_ref;
  sweep_cmd->add_option("--axis", axis, "dt | paths");
  sweep_cmd->add_option("--values", values, "comma-separated, e.g. 2^-3,2^-4,2^-5")->required();
  sweep_cmd->add_option("--replicates", replicates, "seeds averaged per value");
  sweep_cmd->add_option("--reference", sweep_ref, "reference directory (problems without exact u)");

  auto* ref_cmd = app.add_subcommand("reference", "fine solve stored as an error baseline");
  add_run_flags(ref_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (f.threads > 0) omp_set_num_threads(f.threads);
  g_quiet = f.quiet;
  try {
    if (*solve_cmd) return cmd_solve(f, solve_ref);
    if (*sweep_cmd) return cmd_sweep(f, axis, values, replicates, sweep_ref);
    if (*ref_cmd) return cmd_reference(f);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericFailure& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
