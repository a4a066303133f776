#pragma once

/**
 * @file driver.hpp
 * @brief Config-driven pipelines behind the command-line tool: resolve a
 *        flat key=value configuration, run benchmarks under one or more
 *        formulations, and write VTK fields, CSV diagnostics and a JSON
 *        manifest.
 */

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nnfem/analysis.hpp"
#include "nnfem/benchmarks.hpp"
#include "nnfem/io.hpp"
#include "nnfem/reaction.hpp"
#include "nnfem/solvers.hpp"

namespace nnfem::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_solver = 3;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Config {
  std::string benchmark;
  std::vector<std::size_t> seeds;  // empty: benchmark default
  ElementKind kind = ElementKind::quad4;
  std::vector<Formulation> formulations{Formulation::constrained};
  std::optional<double> dt;  // slug only
  double horizon = 1.0;
  double tol = default_qp_tolerance;
  fs::path out_dir = "nnfem_out";
  bool dump_system = false;
  bool vtk = true;
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"benchmark", "seeds",   "kind",    "formulation", "dt",
                                             "horizon",   "tol",     "out_dir", "dump_system", "vtk"};
  return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace detail

/// Sets one configuration key from its text value.
inline void apply(Config& cfg, const std::string& key, const std::string& value) {
  const std::string v = detail::trim(value);
  if (key == "benchmark") {
    cfg.benchmark = v;
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& s : detail::split_list(v)) {
      const double d = detail::parse_double(key, s);
      if (d < 2.0 || d != static_cast<double>(static_cast<std::size_t>(d)))
        throw ConfigError("seeds must be integers >= 2, got '" + s + "'");
      cfg.seeds.push_back(static_cast<std::size_t>(d));
    }
    if (cfg.seeds.empty()) throw ConfigError("seeds list is empty");
  } else if (key == "kind") {
    try {
      cfg.kind = parse_element_kind(v);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "formulation") {
    cfg.formulations.clear();
    for (const auto& s : detail::split_list(v)) {
      try {
        cfg.formulations.push_back(parse_formulation(s));
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }
    if (cfg.formulations.empty()) throw ConfigError("formulation list is empty");
  } else if (key == "dt") {
    cfg.dt = detail::parse_double(key, v);
  } else if (key == "horizon") {
    cfg.horizon = detail::parse_double(key, v);
  } else if (key == "tol") {
    cfg.tol = detail::parse_double(key, v);
  } else if (key == "out_dir") {
    if (v.empty()) throw ConfigError("out_dir is empty");
    cfg.out_dir = v;
  } else if (key == "dump_system") {
    cfg.dump_system = detail::parse_bool(key, v);
  } else if (key == "vtk") {
    cfg.vtk = detail::parse_bool(key, v);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

/// Reads `key = value` lines; `#` starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": missing key");
    out.emplace_back(std::move(key), detail::trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return read_config(in);
}

/// Fills benchmark defaults and checks ranges.
inline Config resolve(Config cfg) {
  if (cfg.benchmark.empty()) throw ConfigError("no benchmark given");
  if (!bench::is_benchmark(cfg.benchmark)) throw ConfigError("unknown benchmark '" + cfg.benchmark + "'");
  if (cfg.seeds.empty()) {
    if (cfg.benchmark == "manufactured") cfg.seeds = {11, 21, 41, 81};
    else if (cfg.benchmark == "slug") cfg.seeds = {101};
    else cfg.seeds = {21};
  }
  if (cfg.benchmark == "slug") {
    if (!cfg.dt) cfg.dt = 0.05;
    if (!(*cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
    const double steps = cfg.horizon / *cfg.dt;
    if (std::llround(steps) < 1 || std::abs(steps - double(std::llround(steps))) > 1e-9 * steps)
      throw ConfigError("horizon must be a whole number of time steps");
  }
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  return cfg;
}

// ---------------------------------------------------------------------------
// Reporting

struct KktRecord {
  std::string mesh;
  std::string formulation;
  std::string quantity;
  std::optional<double> time;
  QpSolution qp;  // multipliers and residuals
};

struct ViolationRow {
  std::string mesh, quantity, formulation;
  std::optional<double> time;
  ViolationStats stats;
};

struct ConvergenceRow {
  std::string formulation, quantity, mesh;
  double h = 0.0;
  double l2 = 0.0;
  std::optional<double> h1;
};

struct CurveRow {
  std::string mesh, formulation;
  std::optional<double> time;
  CurvePoint point;
};

/// Final fields of one (mesh, formulation) run, kept for comparisons.
struct FieldSet {
  std::string mesh;
  Formulation formulation = Formulation::galerkin;
  const Mesh* grid = nullptr;
  std::map<std::string, Vector> fields;
};

struct Report {
  Config config;
  std::vector<ViolationRow> violations;
  std::vector<ConvergenceRow> convergence;
  std::vector<CurveRow> curves;
  std::vector<KktRecord> kkt;
  std::vector<std::pair<std::string, double>> timings;  // label, seconds
  std::vector<fs::path> files;
  std::vector<Mesh> meshes;  // owns grids referenced by final_fields
  std::vector<FieldSet> final_fields;
  json extra = json::object();
  std::string status = "ok";
  std::string error;
};

namespace detail {

inline std::string mesh_label(std::size_t seeds) { return std::to_string(seeds) + "x" + std::to_string(seeds); }

inline std::string level_suffix(std::size_t level) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%04zu", level);
  return buf;
}

inline std::string opt_num(const std::optional<double>& v) { return v ? io::fmt(*v) : std::string{}; }

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void write_field(Report& r, const Mesh& mesh, const Vector& v, const std::string& stem,
                        const std::string& quantity) {
  if (!r.config.vtk) return;
  const fs::path path = r.config.out_dir / (stem + "_" + quantity + ".vtk");
  io::write_vtk(path, mesh, v, quantity, stem);
  r.files.push_back(path);
}

inline void record_stats(Report& r, const std::string& mesh, Formulation fm, std::optional<double> time,
                         const std::map<std::string, Vector>& fields, const ProblemSpec& spec) {
  for (const auto& q : {"F", "G", "A", "B", "C"}) {
    const Bounds b = std::string(q) == "F" ? spec.bounds_f : std::string(q) == "G" ? spec.bounds_g : Bounds::nonnegative();
    r.violations.push_back({mesh, q, to_string(fm), time, violation_stats(fields.at(q), b)});
  }
}

inline void record_curve(Report& r, const Mesh& mesh, const std::string& label, Formulation fm,
                         std::optional<double> time, const Vector& c) {
  for (const auto& p : integrated_concentration_over_y(c, mesh)) r.curves.push_back({label, to_string(fm), time, p});
}

inline void dump_system(Report& r, const ProblemSpec& spec, const std::string& label, double t) {
  const AssembledSystem sys = assemble_operators(spec.mesh, spec.diffusivity);
  const auto [pf, pg] = to_invariants(spec);
  const fs::path base = r.config.out_dir / (spec.name + "_" + label);
  const std::vector<std::pair<fs::path, std::variant<SparseMatrix, Vector>>> items{
      {base.string() + "_K.mtx", sys.stiffness},
      {base.string() + "_M.mtx", sys.capacity},
      {base.string() + "_fF.mtx", assemble_load(spec.mesh, nnfem::detail::load_at(pf.data, t))},
      {base.string() + "_fG.mtx", assemble_load(spec.mesh, nnfem::detail::load_at(pg.data, t))}};
  for (const auto& [path, item] : items) {
    std::visit([&path](const auto& x) { io::write_matrix_market(path, x); }, item);
    r.files.push_back(path);
  }
}

inline std::map<std::string, Vector> species_map(const NodalField& f, const NodalField& g, const SpeciesFields& s) {
  return {{"F", f.values}, {"G", g.values}, {"A", s.a.values}, {"B", s.b.values}, {"C", s.c.values}};
}

inline void run_steady_case(Report& r, std::size_t seeds, Formulation fm, const RunOptions& opt) {
  const auto& cfg = r.config;
  const std::string label = mesh_label(seeds);
  std::optional<bench::ManufacturedBenchmark> mms;
  ProblemSpec spec;
  if (cfg.benchmark == "manufactured") {
    mms = bench::manufactured(seeds, cfg.kind);
    spec = mms->spec;
  } else {
    spec = bench::make_problem(cfg.benchmark, {seeds, cfg.kind, cfg.dt.value_or(0.05), cfg.horizon});
  }
  if (cfg.dump_system && fm == cfg.formulations.front()) dump_system(r, spec, label, 0.0);

  Stopwatch clock;
  SteadyRun run = run_steady(spec, fm, opt);
  r.timings.emplace_back(spec.name + "/" + label + "/" + to_string(fm), clock.seconds());

  const std::string stem = spec.name + "_" + label + "_" + to_string(fm);
  auto fields = species_map(run.f.field, run.g.field, run.species);
  if (fm == Formulation::constrained) {
    fields["lambda_min_F"] = run.f.lambda_min.values;
    fields["lambda_max_F"] = run.f.lambda_max.values;
    fields["lambda_min_G"] = run.g.lambda_min.values;
    fields["lambda_max_G"] = run.g.lambda_max.values;
    r.kkt.push_back({label, to_string(fm), "F", std::nullopt, *run.f.qp});
    r.kkt.push_back({label, to_string(fm), "G", std::nullopt, *run.g.qp});
  }
  for (const auto& [q, v] : fields) write_field(r, spec.mesh, v, stem, q);
  record_stats(r, label, fm, std::nullopt, fields, spec);
  record_curve(r, spec.mesh, label, fm, std::nullopt, fields.at("C"));

  if (mms) {
    const double h = mesh_size(spec.mesh);
    auto grad = [](const std::function<bench::Gradient(const Point2&)>& g) {
      return GradientField([g](const Point2& x) {
        const auto d = g(x);
        return Eigen::Vector2d(d.dx, d.dy);
      });
    };
    const std::string f = to_string(fm);
    r.convergence.push_back({f, "F", label, h, l2_error(run.f.field, mms->exact_f, spec.mesh),
                             h1_seminorm_error(run.f.field, grad(mms->grad_f), spec.mesh)});
    r.convergence.push_back({f, "G", label, h, l2_error(run.g.field, mms->exact_g, spec.mesh),
                             h1_seminorm_error(run.g.field, grad(mms->grad_g), spec.mesh)});
    r.convergence.push_back({f, "A", label, h, l2_error(run.species.a, mms->exact_a, spec.mesh), std::nullopt});
    r.convergence.push_back({f, "B", label, h, l2_error(run.species.b, mms->exact_b, spec.mesh), std::nullopt});
    r.convergence.push_back({f, "C", label, h, l2_error(run.species.c, mms->exact_c, spec.mesh), std::nullopt});
  }
  r.meshes.push_back(spec.mesh);
  r.final_fields.push_back({label, fm, nullptr, std::move(fields)});
}

inline void run_transient_case(Report& r, std::size_t seeds, Formulation fm, const RunOptions& opt) {
  const auto& cfg = r.config;
  const std::string label = mesh_label(seeds);
  const ProblemSpec spec = bench::make_problem(cfg.benchmark, {seeds, cfg.kind, *cfg.dt, cfg.horizon});
  if (cfg.dump_system && fm == cfg.formulations.front()) dump_system(r, spec, label, *cfg.dt);

  Stopwatch clock;
  TransientRun run = run_transient(spec, fm, opt);
  r.timings.emplace_back(spec.name + "/" + label + "/" + to_string(fm), clock.seconds());

  const std::string stem = spec.name + "_" + label + "_" + to_string(fm);
  for (std::size_t n = 0; n < run.levels.size(); ++n) {
    const auto& lvl = run.levels[n];
    const auto fields = species_map(lvl.f, lvl.g, lvl.species);
    for (const auto& [q, v] : fields) write_field(r, spec.mesh, v, stem + level_suffix(n), q);
    record_stats(r, label, fm, lvl.time, fields, spec);
    if (lvl.qp_f) r.kkt.push_back({label, to_string(fm), "F", lvl.time, *lvl.qp_f});
    if (lvl.qp_g) r.kkt.push_back({label, to_string(fm), "G", lvl.time, *lvl.qp_g});
  }
  const auto& last = run.levels.back();
  record_curve(r, spec.mesh, label, fm, last.time, last.species.c.values);
  r.meshes.push_back(spec.mesh);
  r.final_fields.push_back({label, fm, nullptr, species_map(last.f, last.g, last.species)});
}

inline void run_counterexample(Report& r) {
  Stopwatch clock;
  const auto ce = bench::comparison_counterexample();
  r.timings.emplace_back("comparison_counterexample", clock.seconds());
  const int n = static_cast<int>(ce.loads[0].size());
  const double h = ce.system.length / ce.system.elements;

  std::array<Vector, 3> clipped;
  for (int k = 0; k < 3; ++k) clipped[k] = ce.galerkin[k].cwiseMax(0.0);
  const bool clipped_violates = !bench::ordering_violations(clipped[1], clipped[2], 1e-12).empty();

  const fs::path path = r.config.out_dir / "counterexample.csv";
  auto out = io::open_out(path);
  out << "node,x,f1,f2,f3,galerkin_c1,galerkin_c2,galerkin_c3,clipped_c1,clipped_c2,clipped_c3,"
         "constrained_c1,constrained_c2,constrained_c3\n";
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> row{std::to_string(i + 1), io::fmt(h * (i + 1))};
    for (int k = 0; k < 3; ++k) row.push_back(io::fmt(ce.loads[k](i)));
    for (int k = 0; k < 3; ++k) row.push_back(io::fmt(ce.galerkin[k](i)));
    for (int k = 0; k < 3; ++k) row.push_back(io::fmt(clipped[k](i)));
    for (int k = 0; k < 3; ++k) row.push_back(io::fmt(ce.constrained[k].c(i)));
    out << io::csv_row(row) << '\n';
  }
  r.files.push_back(path);
  for (int k = 0; k < 3; ++k) r.kkt.push_back({"1d", "constrained", "c" + std::to_string(k + 1), std::nullopt, ce.constrained[k]});
  if (r.config.dump_system) {
    const fs::path mtx = r.config.out_dir / "comparison_counterexample_H.mtx";
    io::write_matrix_market(mtx, ce.system.hessian);
    r.files.push_back(mtx);
  }
  r.extra["ordering_violated"] = {{"galerkin", ce.galerkin_violates},
                                  {"clipped", clipped_violates},
                                  {"constrained", ce.constrained_violates}};
  r.extra["elements"] = ce.system.elements;
  r.extra["alpha"] = ce.system.alpha;
}

inline void write_csvs(Report& r) {
  const auto& dir = r.config.out_dir;
  if (!r.violations.empty()) {
    const fs::path path = dir / "violations.csv";
    auto out = io::open_out(path);
    out << "mesh,quantity,formulation,time,min,max,ratio_percent,violated_percent\n";
    for (const auto& v : r.violations) {
      out << io::csv_row({v.mesh, v.quantity, v.formulation, opt_num(v.time), io::fmt(v.stats.min),
                          io::fmt(v.stats.max), io::fmt(v.stats.ratio_percent), io::fmt(v.stats.violated_percent)})
          << '\n';
    }
    r.files.push_back(path);
  }
  if (!r.convergence.empty()) {
    const fs::path path = dir / "convergence.csv";
    auto out = io::open_out(path);
    out << "formulation,quantity,mesh,h,l2,h1\n";
    for (const auto& c : r.convergence)
      out << io::csv_row({c.formulation, c.quantity, c.mesh, io::fmt(c.h), io::fmt(c.l2), opt_num(c.h1)}) << '\n';
    r.files.push_back(path);

    const fs::path rates = dir / "convergence_rates.csv";
    auto rout = io::open_out(rates);
    rout << "formulation,quantity,l2_rate,h1_rate\n";
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<ErrorSample>, std::vector<ErrorSample>>> groups;
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& c : r.convergence) {
      const auto key = std::make_pair(c.formulation, c.quantity);
      if (!groups.count(key)) order.push_back(key);
      groups[key].first.push_back({c.h, c.l2});
      if (c.h1) groups[key].second.push_back({c.h, *c.h1});
    }
    for (const auto& key : order) {
      const auto& [l2, h1] = groups[key];
      auto rate = [](const std::vector<ErrorSample>& s) {
        return s.size() >= 2 ? io::fmt(convergence_rates(s).slope) : std::string{};
      };
      rout << io::csv_row({key.first, key.second, rate(l2), rate(h1)}) << '\n';
    }
    r.files.push_back(rates);
  }
  if (!r.curves.empty()) {
    const fs::path path = dir / "integrated_C.csv";
    auto out = io::open_out(path);
    out << "mesh,formulation,time,x,integral_C\n";
    for (const auto& c : r.curves)
      out << io::csv_row({c.mesh, c.formulation, opt_num(c.time), io::fmt(c.point.x), io::fmt(c.point.value)}) << '\n';
    r.files.push_back(path);
  }
}

inline json manifest_json(const Report& r) {
  const auto& c = r.config;
  json m;
  m["status"] = r.status;
  if (!r.error.empty()) m["error"] = r.error;
  json params;
  params["benchmark"] = c.benchmark;
  params["seeds"] = c.seeds;
  params["kind"] = to_string(c.kind);
  std::vector<std::string> forms;
  for (auto f : c.formulations) forms.push_back(to_string(f));
  params["formulation"] = forms;
  if (c.dt) params["dt"] = *c.dt;
  params["horizon"] = c.horizon;
  params["out_dir"] = c.out_dir.string();
  params["dump_system"] = c.dump_system;
  params["vtk"] = c.vtk;
  m["parameters"] = params;
  m["tolerances"] = {{"qp_tol", c.tol},
                     {"recovery_eps", machine_epsilon},
                     {"kkt_certificate", 1e3 * machine_epsilon},
                     {"quadrature_order", default_quadrature_order}};
  json kkt = json::array();
  for (const auto& k : r.kkt) {
    json e{{"mesh", k.mesh},
           {"formulation", k.formulation},
           {"quantity", k.quantity},
           {"iterations", k.qp.iterations},
           {"factorizations", k.qp.factorizations},
           {"used_fallback", k.qp.used_fallback},
           {"stationarity", k.qp.kkt.stationarity},
           {"primal_feasibility", k.qp.kkt.primal_feasibility},
           {"dual_feasibility", k.qp.kkt.dual_feasibility},
           {"complementarity", k.qp.kkt.complementarity},
           {"scale", k.qp.kkt.scale}};
    if (k.time) e["time"] = *k.time;
    kkt.push_back(std::move(e));
  }
  m["kkt"] = std::move(kkt);
  json timing = json::array();
  for (const auto& [label, s] : r.timings) timing.push_back({{"label", label}, {"seconds", s}});
  m["timing_monotonic"] = std::move(timing);
  std::vector<std::string> files;
  for (const auto& f : r.files) files.push_back(f.string());
  m["files"] = files;
  for (const auto& [k, v] : r.extra.items()) m[k] = v;
  return m;
}

inline void write_manifest(Report& r) {
  const fs::path path = r.config.out_dir / "manifest.json";
  auto out = io::open_out(path);
  out << manifest_json(r).dump(2) << '\n';
}

}  // namespace detail

/**
 * Runs the configured benchmark for every mesh and formulation and writes
 * all artifacts. The manifest is written even when a solve fails, with
 * status "failed" and the files produced so far.
 */
inline Report run(const Config& config) {
  Report r;
  r.config = resolve(config);
  RunOptions opt;
  opt.qp.tol = r.config.tol;
  try {
    if (r.config.benchmark == "comparison_counterexample") {
      detail::run_counterexample(r);
    } else {
      for (auto seeds : r.config.seeds) {
        for (auto fm : r.config.formulations) {
          if (r.config.benchmark == "slug") detail::run_transient_case(r, seeds, fm, opt);
          else detail::run_steady_case(r, seeds, fm, opt);
        }
      }
      for (std::size_t k = 0; k < r.final_fields.size(); ++k) r.final_fields[k].grid = &r.meshes[k];
    }
    detail::write_csvs(r);
  } catch (const std::exception& e) {
    r.status = "failed";
    r.error = e.what();
    detail::write_manifest(r);
    throw;
  }
  detail::write_manifest(r);
  return r;
}

struct DifferenceRow {
  std::string mesh, quantity, pair;
  double l2 = 0.0;
  double max_abs = 0.0;
};

/// FE L2 norm of a nodal vector.
inline double l2_norm(const Vector& v, const Mesh& mesh) {
  return l2_error(v, [](const Point2&) { return 0.0; }, mesh);
}

/**
 * Runs galerkin, clipped and constrained on one benchmark and adds
 * differences.csv with pairwise field differences (final level for
 * transient runs).
 */
inline std::pair<Report, std::vector<DifferenceRow>> compare(Config config) {
  config.formulations = {Formulation::galerkin, Formulation::clipped, Formulation::constrained};
  Report r = run(config);
  std::vector<DifferenceRow> diffs;
  if (r.config.benchmark == "comparison_counterexample") return {std::move(r), diffs};

  const std::vector<std::pair<Formulation, Formulation>> pairs{{Formulation::clipped, Formulation::constrained},
                                                               {Formulation::galerkin, Formulation::constrained},
                                                               {Formulation::galerkin, Formulation::clipped}};
  for (auto seeds : r.config.seeds) {
    const std::string label = detail::mesh_label(seeds);
    auto find = [&](Formulation f) -> const FieldSet& {
      for (const auto& fs : r.final_fields)
        if (fs.mesh == label && fs.formulation == f) return fs;
      throw std::logic_error("missing run for " + label);
    };
    for (const auto& [a, b] : pairs) {
      const FieldSet& fa = find(a);
      const FieldSet& fb = find(b);
      for (const auto& q : {"F", "G", "A", "B", "C"}) {
        const Vector d = fa.fields.at(q) - fb.fields.at(q);
        diffs.push_back({label, q, to_string(a) + "-" + to_string(b), l2_norm(d, *fa.grid), d.cwiseAbs().maxCoeff()});
      }
    }
  }
  const fs::path path = r.config.out_dir / "differences.csv";
  auto out = io::open_out(path);
  out << "mesh,quantity,pair,l2,max_abs\n";
  for (const auto& d : diffs) out << io::csv_row({d.mesh, d.quantity, d.pair, io::fmt(d.l2), io::fmt(d.max_abs)}) << '\n';
  r.files.push_back(path);
  detail::write_manifest(r);
  return {std::move(r), diffs};
}

}  // namespace nnfem::cli
