// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/harness.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "pidemc/error.hpp"
#include "pidemc/rng.hpp"

#ifndef PIDEMC_GIT_DESCRIBE
#define PIDEMC_GIT_DESCRIBE "unknown"
#endif

namespace pidemc {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

KernelSpec make_kernel(const RunConfig& c) {
  const KernelFamily f = parse_kernel_family(c.kernel_family);
  switch (f) {
    case KernelFamily::ConstantIndicator:
      return KernelSpec::constant_indicator(c.dim, c.delta);
    case KernelFamily::Hypersingular:
      return KernelSpec::hypersingular(c.dim, c.delta, c.alpha);
    case KernelFamily::Tempered:
      return KernelSpec::tempered(c.dim, c.delta, c.alpha, c.beta);
    case KernelFamily::Gaussian:
      return KernelSpec::gaussian(c.dim, c.delta, c.sigma);
  }
  detail::throw_invalid("unknown kernel family");
}

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    detail::throw_invalid("config key '" + key + "' has the wrong type");
  }
}

void set_key(RunConfig& c, const std::string& key, const json& v) {
  if (key == "problem") {
    c.problem = get_as<std::string>(v, key);
  } else if (key == "dim") {
    c.dim = get_as<int>(v, key);
  } else if (key == "kernel.family") {
    c.kernel_family = get_as<std::string>(v, key);
  } else if (key == "kernel.alpha") {
    c.alpha = get_as<double>(v, key);
  } else if (key == "kernel.beta") {
    c.beta = get_as<double>(v, key);
  } else if (key == "kernel.sigma") {
    c.sigma = get_as<double>(v, key);
  } else if (key == "kernel.delta") {
    c.delta = get_as<double>(v, key);
  } else if (key == "grid.level") {
    c.level = get_as<int>(v, key);
  } else if (key == "grid.box") {
    if (v.is_number()) {
      const double h = get_as<double>(v, key);
      c.box = std::pair{-h, h};
    } else if (v.is_array() && v.size() == 2) {
      c.box = std::pair{get_as<double>(v[0], key), get_as<double>(v[1], key)};
    } else if (v.is_null()) {
      c.box.reset();
    } else {
      detail::throw_invalid("grid.box must be a half-width or [lo, hi]");
    }
  } else if (key == "solver.dt") {
    c.dt = get_as<double>(v, key);
  } else if (key == "solver.n_steps") {
    c.n_steps = get_as<int>(v, key);
  } else if (key == "solver.m_paths") {
    c.m_paths = get_as<int>(v, key);
  } else if (key == "solver.max_jumps") {
    c.max_jumps = get_as<std::uint32_t>(v, key);
  } else if (key == "solver.exterior_policy") {
    c.exterior = parse_exterior_policy(get_as<std::string>(v, key));
  } else if (key == "solver.retain_last") {
    c.retain_last = get_as<int>(v, key);
  } else if (key == "seed") {
    c.seed = get_as<std::uint64_t>(v, key);
  } else if (key == "error.n_eval") {
    c.n_eval = get_as<int>(v, key);
  } else if (key == "error.eval_seed") {
    c.eval_seed = get_as<std::uint64_t>(v, key);
  } else {
    detail::throw_invalid("unknown config key '" + key + "'");
  }
}

void flatten(RunConfig& c, const json& node, const std::string& prefix) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(c, *it, key);
    } else {
      set_key(c, key, *it);
    }
  }
}

// Little-endian 64-bit words.
void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is, const std::filesystem::path& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) {
    throw IoError("truncated snapshot file " + path.string());
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, const std::filesystem::path& path) {
  if (cell.empty()) return kNaN;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size()) {
    throw IoError("bad number '" + cell + "' in " + path.string());
  }
  return v;
}

}  // namespace

std::string_view build_describe() { return PIDEMC_GIT_DESCRIBE; }

void apply_config_json(RunConfig& config, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    detail::throw_invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) detail::throw_invalid("config must be a JSON object");
  flatten(config, doc, "");
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c;
  apply_config_json(c, ss.str());
  return c;
}

ProblemSpec build_problem(const RunConfig& c) {
  ProblemSpec p = make_problem(c.problem, c.dim, c.alpha, c.delta);
  if (c.box) {
    const auto d = static_cast<std::size_t>(c.dim);
    p.box = Box(std::vector<double>(d, c.box->first), std::vector<double>(d, c.box->second));
  }
  if (!c.kernel_family.empty()) {
    KernelSpec k = make_kernel(c);
    if (!p.kernel || !(*p.kernel == k)) {
      // The manufactured sources were built for the original kernel.
      p.kernel = k;
      p.exact = nullptr;
      p.separable.reset();
      p.name += "+" + std::string(to_string(k.family()));
    }
  }
  return p;
}

SolverConfig solver_config(const RunConfig& c, double T) {
  SolverConfig s;
  s.dt = c.dt;
  s.n_steps = c.n_steps > 0 ? c.n_steps : steps_for(T, c.dt);
  s.m_paths = c.m_paths;
  s.grid_level = c.level;
  s.max_jumps = c.max_jumps;
  s.exterior_policy = c.exterior;
  s.master_seed = c.seed;
  s.retain_last = c.retain_last;
  return s;
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("problem", c.problem);
  out.emplace_back("dim", std::to_string(c.dim));
  out.emplace_back("kernel.family", c.kernel_family);
  out.emplace_back("kernel.alpha", format_double(c.alpha));
  out.emplace_back("kernel.beta", format_double(c.beta));
  out.emplace_back("kernel.sigma", format_double(c.sigma));
  out.emplace_back("kernel.delta", format_double(c.delta));
  out.emplace_back("grid.level", std::to_string(c.level));
  out.emplace_back("grid.box",
                   c.box ? format_double(c.box->first) + "," + format_double(c.box->second) : "");
  out.emplace_back("solver.dt", format_double(c.dt));
  out.emplace_back("solver.n_steps", std::to_string(c.n_steps));
  out.emplace_back("solver.m_paths", std::to_string(c.m_paths));
  out.emplace_back("solver.max_jumps", std::to_string(c.max_jumps));
  out.emplace_back("solver.exterior_policy", std::string(to_string(c.exterior)));
  out.emplace_back("solver.retain_last", std::to_string(c.retain_last));
  out.emplace_back("seed", std::to_string(c.seed));
  out.emplace_back("error.n_eval", std::to_string(c.n_eval));
  out.emplace_back("error.eval_seed", std::to_string(c.eval_seed));
  return out;
}

RunConfig config_from_manifest(const std::vector<std::pair<std::string, std::string>>& lines) {
  RunConfig c;
  const auto known = describe(c);
  auto is_config_key = [&](const std::string& k) {
    for (const auto& [name, v] : known) {
      if (name == k) return true;
    }
    return false;
  };
  for (const auto& [key, value] : lines) {
    if (!is_config_key(key)) continue;
    if (key == "problem" || key == "kernel.family" || key == "solver.exterior_policy") {
      set_key(c, key, json(value));
    } else if (key == "grid.box") {
      const auto comma = value.find(',');
      if (value.empty()) {
        c.box.reset();
      } else if (comma == std::string::npos) {
        throw IoError("bad grid.box in manifest: " + value);
      } else {
        c.box = std::pair{parse_double(value.substr(0, comma), "manifest"),
                          parse_double(value.substr(comma + 1), "manifest")};
      }
    } else {
      json v;
      try {
        v = json::parse(value);
      } catch (const json::parse_error&) {
        throw IoError("bad value for " + key + " in manifest: " + value);
      }
      set_key(c, key, v);
    }
  }
  return c;
}

ErrorReport l2_error(const ProblemSpec& problem, const SolutionSnapshot& final_snapshot,
                     const std::function<double(std::span<const double>)>& reference, int n_eval,
                     std::uint64_t eval_seed) {
  if (n_eval <= 0) detail::throw_invalid("l2_error: n_eval must be > 0");
  if (!final_snapshot.interpolant) detail::throw_invalid("l2_error: snapshot was pruned");
  const Box& box = problem.box;
  const auto d = box.dimension();
  RandomStream stream(StreamKey{0, 0, 0, eval_seed});
  constexpr std::size_t kBatch = 4096;
  std::vector<double> pts(kBatch * d), u(kBatch);
  long double acc = 0.0L;
  std::size_t done = 0;
  const auto n = static_cast<std::size_t>(n_eval);
  while (done < n) {
    const std::size_t b = std::min(kBatch, n - done);
    for (std::size_t p = 0; p < b; ++p) {
      for (std::size_t i = 0; i < d; ++i) {
        pts[p * d + i] = box.lower(i) + (box.upper(i) - box.lower(i)) * stream.uniform01();
      }
    }
    final_snapshot.interpolant->eval_batch(std::span<const double>(pts.data(), b * d),
                                           std::span<double>(u.data(), b));
    for (std::size_t p = 0; p < b; ++p) {
      const double e = u[p] - reference(std::span<const double>(pts.data() + p * d, d));
      acc += static_cast<long double>(e) * e;
    }
    done += b;
  }
  ErrorReport r;
  r.l2_error = static_cast<double>(std::sqrt(acc * box.volume() / static_cast<long double>(n)));
  r.n_eval_points = n_eval;
  r.eval_seed = eval_seed;
  return r;
}

ErrorReport l2_error(const ProblemSpec& problem, const SolutionSnapshot& final_snapshot,
                     const SparseInterpolant& reference, int n_eval, std::uint64_t eval_seed) {
  return l2_error(
      problem, final_snapshot, [&](std::span<const double> x) { return reference.eval(x); },
      n_eval, eval_seed);
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::Dt ? "dt" : "paths"; }

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "dt") return SweepAxis::Dt;
  if (name == "paths") return SweepAxis::Paths;
  detail::throw_invalid("unknown sweep axis '" + std::string(name) + "' (expected dt|paths)");
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    detail::throw_invalid("fit_loglog: need >= 2 matching points");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) detail::throw_invalid("fit_loglog: values must be > 0");
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double a = std::log(x[k]) - mx, b = std::log(y[k]) - my;
    sxx += a * a;
    sxy += a * b;
    syy += b * b;
  }
  if (sxx == 0.0) detail::throw_invalid("fit_loglog: x values are all equal");
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

SweepResult run_sweep(SweepAxis axis, const std::vector<double>& values,
                      const SweepEvaluator& evaluator, int jobs) {
  SweepResult r;
  r.axis = axis;
  r.points.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    r.points[k].value = values[k];
    r.points[k].l2_error = kNaN;
    r.points[k].ok = false;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t failed_at = values.size();
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= values.size()) return;
      try {
        const double e = evaluator(values[k]);
        r.points[k].l2_error = e;
        r.points[k].ok = std::isfinite(e);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(mu);
        stop.store(true);
        if (k < failed_at) {
          failed_at = k;
          r.failure = "value " + format_double(values[k]) + ": " + ex.what();
        }
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(values.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  r.complete = r.failure.empty();

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    auto& p = r.points[k];
    p.rate = kNaN;
    if (k > 0 && p.ok && r.points[k - 1].ok && p.l2_error > 0 && r.points[k - 1].l2_error > 0) {
      p.rate = std::log(r.points[k - 1].l2_error / p.l2_error) /
               std::log(r.points[k - 1].value / p.value);
    }
    if (p.ok && p.l2_error > 0.0) {
      xs.push_back(p.value);
      ys.push_back(p.l2_error);
    }
  }
  r.fitted_slope = kNaN;
  r.fit_r2 = kNaN;
  if (xs.size() >= 3) {
    const LogLogFit f = fit_loglog(xs, ys);
    r.fitted_slope = f.slope;
    r.fit_r2 = f.r2;
  }
  return r;
}

SweepResult run_sweep(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                      const SparseInterpolant* reference, int replicates, int jobs) {
  if (values.size() < 3) detail::throw_invalid("sweep: need at least 3 values");
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (!(values[k] != values[k - 1])) detail::throw_invalid("sweep: values must be distinct");
  }
  if (replicates < 1) detail::throw_invalid("sweep: replicates must be >= 1");
  if (!reference && !build_problem(base).has_exact()) {
    detail::throw_invalid("sweep: problem '" + base.problem +
                          "' has no exact solution; pass a reference");
  }
  auto evaluator = [&, replicates](double v) {
    RunConfig c = base;
    if (axis == SweepAxis::Dt) {
      c.dt = v;
      c.n_steps = 0;
    } else {
      if (v < 1 || v != std::floor(v)) detail::throw_invalid("sweep: path counts must be integers");
      c.m_paths = static_cast<int>(v);
    }
    if (c.retain_last == 0) c.retain_last = 1;
    const ProblemSpec p = build_problem(c);
    double sum = 0.0;
    for (int r = 0; r < replicates; ++r) {
      c.seed = base.seed + static_cast<std::uint64_t>(r);
      const SolverConfig sc = solver_config(c, p.T);
      const auto snaps = solve(p, sc);
      const double T = snaps.back().time;
      const ErrorReport e =
          reference ? l2_error(p, snaps.back(), *reference, c.n_eval, c.eval_seed)
                    : l2_error(
                          p, snaps.back(),
                          [&](std::span<const double> x) { return p.exact(T, x); }, c.n_eval,
                          c.eval_seed);
      sum += e.l2_error;
    }
    return sum / replicates;
  };
  return run_sweep(axis, values, evaluator, jobs);
}

SolutionSnapshot reference_solution(const ProblemSpec& problem, const SolverConfig& fine) {
  SolverConfig c = fine;
  c.retain_last = 1;
  auto snaps = solve(problem, c);
  return std::move(snaps.back());
}

void write_snapshot(const std::filesystem::path& path, const SolutionSnapshot& snapshot) {
  if (!snapshot.interpolant) detail::throw_invalid("write_snapshot: snapshot was pruned");
  const SparseGridDesign& g = snapshot.interpolant->design();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  put_u64(os, static_cast<std::uint64_t>(g.dimension()));
  put_u64(os, static_cast<std::uint64_t>(g.level()));
  put_u64(os, static_cast<std::uint64_t>(g.size()));
  for (double v : g.coordinates()) put_u64(os, std::bit_cast<std::uint64_t>(v));
  for (double v : snapshot.interpolant->values()) put_u64(os, std::bit_cast<std::uint64_t>(v));
  os.flush();
  if (!os) throw IoError("write failed for " + path.string());
}

StoredSnapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  StoredSnapshot s;
  s.dim = static_cast<std::int64_t>(get_u64(is, path));
  s.level = static_cast<std::int64_t>(get_u64(is, path));
  const auto n = static_cast<std::int64_t>(get_u64(is, path));
  if (s.dim < 1 || s.dim > 100000 || s.level < 1 || s.level > 20 || n < 1 ||
      n > (std::int64_t{1} << 40) / s.dim) {
    throw IoError("corrupt snapshot header in " + path.string());
  }
  const auto un = static_cast<std::size_t>(n), ud = static_cast<std::size_t>(s.dim);
  const auto expected = 24 + 8 * (un * ud + un);
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec || size != expected) throw IoError("snapshot size mismatch in " + path.string());
  s.coordinates.resize(un * ud);
  s.values.resize(un);
  for (double& v : s.coordinates) v = std::bit_cast<double>(get_u64(is, path));
  for (double& v : s.values) v = std::bit_cast<double>(get_u64(is, path));
  return s;
}

SparseInterpolant load_interpolant(const StoredSnapshot& stored, const Box& box,
                                   ExteriorPolicy policy) {
  auto design = build_grid(static_cast<int>(stored.dim), static_cast<int>(stored.level), box);
  const auto& c = design->coordinates();
  if (c.size() != stored.coordinates.size() ||
      std::memcmp(c.data(), stored.coordinates.data(), c.size() * sizeof(double)) != 0) {
    throw IoError("stored grid does not match the grid rebuilt on the given box");
  }
  return SparseInterpolant(design, stored.values, policy);
}

void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "# pide-mc run manifest\n";
  for (const auto& [k, v] : describe(config)) os << k << " = " << v << "\n";
  os << "git_describe = " << build_describe() << "\n";
  for (const auto& [k, v] : extra) os << k << " = " << v << "\n";
  if (!os) throw IoError("write failed for " + path.string());
}

std::vector<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("bad manifest line '" + line + "'");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    os << (i ? "," : "") << table.header[i];
  }
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
  if (!os) throw IoError("write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = s.find(',', start);
      cells.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  if (!std::getline(is, line)) throw IoError("empty CSV file " + path.string());
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw IoError("ragged CSV row in " + path.string());
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, path));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable to_csv(const SweepResult& result) {
  CsvTable t;
  t.header = {std::string(to_string(result.axis)), "l2_error", "rate"};
  for (const auto& p : result.points) t.rows.push_back({p.value, p.l2_error, p.rate});
  return t;
}

CsvTable to_csv(const ErrorReport& report, double dt) {
  CsvTable t;
  t.header = {"dt", "l2_error", "rate"};
  t.rows.push_back({dt, report.l2_error, kNaN});
  return t;
}

}  // namespace pidemc
