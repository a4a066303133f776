// Command-line front end: `nnfem run` and `nnfem compare`.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "nnfem/driver.hpp"

namespace {

using nnfem::cli::Config;

struct Flags {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_options(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--config", flags.config_file, "key = value file; flags override its entries");
  const std::map<std::string, std::string> help{
      {"benchmark", "manufactured | tank | point_sources | slug | comparison_counterexample"},
      {"seeds", "comma list of nodes per side, e.g. 11,21,41"},
      {"kind", "quad4 | tri3"},
      {"formulation", "comma list of galerkin, clipped, constrained"},
      {"dt", "time step (slug)"},
      {"horizon", "final time (slug)"},
      {"tol", "QP tolerance"},
      {"out_dir", "output directory"},
      {"vtk", "write VTK fields (true | false)"}};
  for (const auto& [key, text] : help) {
    std::string flag = "--" + key;
    if (key == "out_dir") flag = "--out-dir";
    cmd.add_option(flag, flags.values[key], text);
  }
  cmd.add_flag("--dump-system", "write K, M and load vectors as Matrix Market files");
}

Config build_config(const CLI::App& cmd, const Flags& flags) {
  Config cfg;
  if (!flags.config_file.empty()) {
    for (const auto& [k, v] : nnfem::cli::read_config_file(flags.config_file)) nnfem::cli::apply(cfg, k, v);
  }
  for (const auto& [key, value] : flags.values) {
    const std::string flag = key == "out_dir" ? "--out-dir" : "--" + key;
    if (cmd.count(flag) > 0) nnfem::cli::apply(cfg, key, value);
  }
  if (cmd.count("--dump-system") > 0) cfg.dump_system = true;
  return cfg;
}

void print_violations(const nnfem::cli::Report& r) {
  std::printf("%-10s %-3s %-12s %12s %12s %10s %10s\n", "mesh", "q", "formulation", "min", "max", "ratio%",
              "violated%");
  for (const auto& v : r.violations) {
    if (v.time && r.config.dt && *v.time < r.config.horizon - 0.5 * *r.config.dt) continue;
    std::printf("%-10s %-3s %-12s %12.4e %12.4e %10.3f %10.3f\n", v.mesh.c_str(), v.quantity.c_str(),
                v.formulation.c_str(), v.stats.min, v.stats.max, v.stats.ratio_percent, v.stats.violated_percent);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-negative finite element solver for fast bimolecular diffusion-reaction"};
  app.require_subcommand(1);
  Flags run_flags, compare_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run one benchmark under the chosen formulations");
  CLI::App* compare_cmd = app.add_subcommand("compare", "run galerkin, clipped and constrained side by side");
  add_options(*run_cmd, run_flags);
  add_options(*compare_cmd, compare_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? nnfem::cli::exit_ok : nnfem::cli::exit_config;
  }

  try {
    if (run_cmd->parsed()) {
      const auto report = nnfem::cli::run(build_config(*run_cmd, run_flags));
      print_violations(report);
      if (report.extra.contains("ordering_violated"))
        std::cout << "ordering violated: " << report.extra["ordering_violated"].dump() << '\n';
    } else {
      const auto [report, diffs] = nnfem::cli::compare(build_config(*compare_cmd, compare_flags));
      print_violations(report);
      if (report.extra.contains("ordering_violated"))
        std::cout << "ordering violated: " << report.extra["ordering_violated"].dump() << '\n';
      for (const auto& d : diffs) {
        std::printf("%-10s %-3s %-22s l2 %.4e max %.4e\n", d.mesh.c_str(), d.quantity.c_str(), d.pair.c_str(), d.l2,
                    d.max_abs);
      }
    }
  } catch (const nnfem::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return nnfem::cli::exit_config;
  } catch (const nnfem::MeshError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return nnfem::cli::exit_config;
  } catch (const nnfem::ProblemError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return nnfem::cli::exit_config;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return nnfem::cli::exit_solver;
  }
  return nnfem::cli::exit_ok;
}
