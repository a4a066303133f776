#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nnfem/driver.hpp"

using namespace nnfem;
using namespace nnfem::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nnfem_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct Process {
  int code = -1;
  std::string output;
};

Process run_cli(const std::string& args) {
  const std::string cmd = std::string(NNFEM_CLI_PATH) + " " + args + " 2>&1";
  Process p;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return p;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) p.output += buf;
  const int status = pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

Config config_for(const std::string& benchmark, const fs::path& out) {
  Config c;
  c.benchmark = benchmark;
  c.out_dir = out;
  return c;
}

}  // namespace

TEST(ConfigParsing, AppliesEveryKey) {
  Config c;
  apply(c, "benchmark", "slug");
  apply(c, "seeds", "11, 21,41");
  apply(c, "kind", "tri3");
  apply(c, "formulation", "galerkin,constrained");
  apply(c, "dt", "0.25");
  apply(c, "horizon", "2");
  apply(c, "tol", "1e-12");
  apply(c, "out_dir", "somewhere");
  apply(c, "dump_system", "true");
  apply(c, "vtk", "false");
  EXPECT_EQ(c.benchmark, "slug");
  EXPECT_EQ(c.seeds, (std::vector<std::size_t>{11, 21, 41}));
  EXPECT_EQ(c.kind, ElementKind::tri3);
  EXPECT_EQ(c.formulations, (std::vector<Formulation>{Formulation::galerkin, Formulation::constrained}));
  EXPECT_EQ(*c.dt, 0.25);
  EXPECT_EQ(c.horizon, 2.0);
  EXPECT_EQ(c.tol, 1e-12);
  EXPECT_EQ(c.out_dir, fs::path("somewhere"));
  EXPECT_TRUE(c.dump_system);
  EXPECT_FALSE(c.vtk);
  EXPECT_EQ(config_keys().size(), 10u);
}

TEST(ConfigParsing, RejectsBadValues) {
  Config c;
  EXPECT_THROW(apply(c, "seeds", "1"), ConfigError);
  EXPECT_THROW(apply(c, "seeds", "ten"), ConfigError);
  EXPECT_THROW(apply(c, "kind", "hex8"), ConfigError);
  EXPECT_THROW(apply(c, "formulation", "upwind"), ConfigError);
  EXPECT_THROW(apply(c, "dt", "0.1s"), ConfigError);
  EXPECT_THROW(apply(c, "vtk", "maybe"), ConfigError);
  EXPECT_THROW(apply(c, "colour", "blue"), ConfigError);
}

TEST(ConfigParsing, ReadsKeyValueText) {
  std::istringstream in("# comment\n\nbenchmark = tank\n  seeds=9 # trailing\nvtk = false\n");
  const auto kv = read_config(in);
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"benchmark", "tank"}));
  EXPECT_EQ(kv[1].second, "9");
  std::istringstream bad("benchmark tank\n");
  EXPECT_THROW(read_config(bad), ConfigError);
  EXPECT_THROW(read_config_file("/nonexistent/nnfem.cfg"), ConfigError);
}

TEST(ConfigParsing, ResolveFillsDefaults) {
  Config c;
  EXPECT_THROW(resolve(c), ConfigError);
  c.benchmark = "manufactured";
  EXPECT_EQ(resolve(c).seeds, (std::vector<std::size_t>{11, 21, 41, 81}));
  c.benchmark = "slug";
  const Config s = resolve(c);
  EXPECT_EQ(s.seeds, (std::vector<std::size_t>{101}));
  EXPECT_EQ(*s.dt, 0.05);
  c.dt = 0.3;
  EXPECT_THROW(resolve(c), ConfigError);
  c.dt = 0.25;
  EXPECT_NO_THROW(resolve(c));
  c.benchmark = "nope";
  EXPECT_THROW(resolve(c), ConfigError);
}

TEST(Driver, ManufacturedConvergenceTable) {
  const fs::path out = scratch("mms");
  Config c = config_for("manufactured", out);
  c.seeds = {5, 9, 17, 33};
  c.vtk = false;
  c.formulations = {Formulation::galerkin, Formulation::constrained};
  const Report r = run(c);
  EXPECT_EQ(r.convergence.size(), 2u * 4u * 5u);
  const auto rows = lines(out / "convergence.csv");
  ASSERT_EQ(rows.size(), 1u + 40u);
  EXPECT_EQ(rows[0], "formulation,quantity,mesh,h,l2,h1");
  const auto rates = lines(out / "convergence_rates.csv");
  ASSERT_EQ(rates.size(), 1u + 10u);
  const auto manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  EXPECT_EQ(manifest["parameters"]["seeds"].size(), 4u);
  EXPECT_EQ(manifest["kkt"].size(), 8u);
  fs::remove_all(out);
}

TEST(Driver, SlugWritesEveryLevel) {
  const fs::path out = scratch("slug");
  Config c = config_for("slug", out);
  c.seeds = {11};
  c.dt = 0.05;
  const Report r = run(c);
  for (std::size_t n = 0; n <= 20; ++n) {
    char name[64];
    std::snprintf(name, sizeof name, "slug_11x11_constrained_%04zu_C.vtk", n);
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  EXPECT_FALSE(fs::exists(out / "slug_11x11_constrained_0021_C.vtk"));
  EXPECT_EQ(lines(out / "violations.csv").size(), 1u + 21u * 5u);
  EXPECT_EQ(r.kkt.size(), 40u);
  fs::remove_all(out);
}

TEST(Driver, RunsAreDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    Config c = config_for("point_sources", dir);
    c.seeds = {15};
    c.formulations = {Formulation::galerkin, Formulation::constrained};
    run(c);
  }
  for (const char* f : {"violations.csv", "integrated_C.csv", "point_sources_15x15_constrained_C.vtk"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Driver, CompareWritesPairwiseDifferences) {
  const fs::path out = scratch("compare");
  Config c = config_for("tank", out);
  c.seeds = {13};
  c.vtk = false;
  const auto [report, diffs] = compare(c);
  EXPECT_EQ(report.config.formulations.size(), 3u);
  ASSERT_EQ(diffs.size(), 15u);
  EXPECT_EQ(lines(out / "differences.csv").size(), 16u);
  for (const auto& d : diffs) {
    EXPECT_GE(d.l2, 0.0);
    EXPECT_LE(d.l2, d.max_abs * std::sqrt(2.0) + 1e-15);
  }
  fs::remove_all(out);
}

TEST(Driver, CompareSeparatesFormulations) {
  const fs::path out = scratch("compare_ps");
  Config c = config_for("point_sources", out);
  c.seeds = {15};
  c.vtk = false;
  const auto [report, diffs] = compare(c);
  auto row = [&](const std::string& pair, const std::string& q) {
    for (const auto& d : diffs)
      if (d.pair == pair && d.quantity == q) return d;
    throw std::logic_error("missing row");
  };
  // Galerkin goes negative here, so both corrections move the fields.
  EXPECT_GT(row("galerkin-constrained", "F").max_abs, 0.0);
  EXPECT_GT(row("galerkin-clipped", "C").max_abs, 0.0);
  EXPECT_GT(row("clipped-constrained", "C").l2, 0.0);
  EXPECT_EQ(l2_norm(Vector::Zero(15 * 15), report.meshes.front()), 0.0);
  fs::remove_all(out);
}

TEST(Driver, CounterexampleFlagsOrdering) {
  const fs::path out = scratch("ce");
  const Report r = run(config_for("comparison_counterexample", out));
  EXPECT_TRUE(r.extra["ordering_violated"]["galerkin"].get<bool>());
  EXPECT_TRUE(r.extra["ordering_violated"]["constrained"].get<bool>());
  const auto rows = lines(out / "counterexample.csv");
  EXPECT_EQ(rows.size(), 6u);
  const auto manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_TRUE(manifest["ordering_violated"]["constrained"].get<bool>());
  fs::remove_all(out);
}

TEST(Driver, DumpSystemRoundTrips) {
  const fs::path out = scratch("dump");
  Config c = config_for("point_sources", out);
  c.seeds = {7};
  c.vtk = false;
  c.dump_system = true;
  run(c);
  const SparseMatrix k = io::read_matrix_market(out / "point_sources_7x7_K.mtx");
  const auto spec = bench::point_sources(7);
  const SparseMatrix ref = assemble_operators(spec.mesh, spec.diffusivity).stiffness;
  EXPECT_LE(Eigen::MatrixXd(k - ref).cwiseAbs().maxCoeff(), 1e-15 * Eigen::MatrixXd(ref).cwiseAbs().maxCoeff());
  EXPECT_TRUE(fs::exists(out / "point_sources_7x7_fG.mtx"));
  fs::remove_all(out);
}

TEST(VtkOutput, LegacyAsciiLayout) {
  const fs::path out = scratch("vtk");
  const Mesh m = generate_structured({0.0, 0.0}, {1.0, 1.0}, {3, 2}, ElementKind::quad4);
  io::write_vtk(out / "f.vtk", m, Vector::LinSpaced(6, 0.0, 5.0), "C", "demo");
  const auto l = lines(out / "f.vtk");
  ASSERT_GT(l.size(), 10u);
  EXPECT_EQ(l[0].rfind("# vtk DataFile Version", 0), 0u);
  EXPECT_EQ(l[2], "ASCII");
  EXPECT_EQ(l[3], "DATASET UNSTRUCTURED_GRID");
  EXPECT_EQ(l[4].rfind("POINTS 6", 0), 0u);
  const std::string text = slurp(out / "f.vtk");
  EXPECT_NE(text.find("CELLS 2 10"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 2\n9\n9\n"), std::string::npos);
  EXPECT_NE(text.find("POINT_DATA 6\nSCALARS C double 1\nLOOKUP_TABLE default\n"), std::string::npos);
  fs::remove_all(out);
}

TEST(Executable, ExitCodes) {
  EXPECT_EQ(run_cli("").code, exit_config);
  EXPECT_EQ(run_cli("run --benchmark nope").code, exit_config);
  EXPECT_EQ(run_cli("run --benchmark tank --seeds 1").code, exit_config);
  EXPECT_EQ(run_cli("run --config /nonexistent/file.cfg").code, exit_config);
  EXPECT_EQ(run_cli("run --benchmark slug --dt 0.3 --seeds 5").code, exit_config);
  EXPECT_EQ(run_cli("run --bogus-flag").code, exit_config);
  EXPECT_EQ(run_cli("--help").code, exit_ok);
}

TEST(Executable, RunWithConfigFileAndOverride) {
  const fs::path out = scratch("exe");
  fs::create_directories(out);
  {
    std::ofstream cfg(out / "run.cfg");
    cfg << "benchmark = point_sources\nseeds = 41\nformulation = galerkin\nvtk = false\n";
  }
  const Process p = run_cli("run --config " + (out / "run.cfg").string() + " --seeds 11 --formulation galerkin,constrained" +
                        " --out-dir " + (out / "res").string());
  ASSERT_EQ(p.code, exit_ok) << p.output;
  const auto rows = lines(out / "res" / "violations.csv");
  ASSERT_EQ(rows.size(), 11u);
  int galerkin = 0, constrained = 0;
  for (const auto& r : rows) {
    EXPECT_EQ(r.find("41x41"), std::string::npos);
    galerkin += r.find(",galerkin,") != std::string::npos;
    constrained += r.find(",constrained,") != std::string::npos;
  }
  EXPECT_EQ(galerkin, 5);
  EXPECT_EQ(constrained, 5);
  EXPECT_NE(p.output.find("constrained"), std::string::npos);
  fs::remove_all(out);
}

TEST(Executable, CompareCounterexamplePrintsFlags) {
  const fs::path out = scratch("exe_ce");
  const Process p = run_cli("compare --benchmark comparison_counterexample --out-dir " + out.string());
  ASSERT_EQ(p.code, exit_ok) << p.output;
  EXPECT_NE(p.output.find("ordering violated"), std::string::npos);
  EXPECT_NE(p.output.find("\"constrained\":true"), std::string::npos);
  fs::remove_all(out);
}
