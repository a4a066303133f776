#pragma once

/**
 * @file benchmarks.hpp
 * @brief Ready-to-run problem definitions: manufactured solution, reaction
 *        tank, stationary point sources, reacting slug, and a 1D family of
 *        diffusion-decay systems showing the loss of the comparison
 *        principle.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nnfem/boxqp.hpp"
#include "nnfem/mesh.hpp"
#include "nnfem/reaction.hpp"
#include "nnfem/solvers.hpp"
#include "nnfem/tensor_field.hpp"

namespace nnfem::bench {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// Manufactured solution

struct ManufacturedParams {
  double lx = 2.0;
  double ly = 1.0;
  double theta = pi / 3.0;
  double d1 = 1000.0;
  double d2 = 1.0;
  Stoichiometry stoichiometry{2.0, 3.0, 1.0};
};

struct Gradient {
  double dx = 0.0;
  double dy = 0.0;
};

struct ManufacturedBenchmark {
  ProblemSpec spec;
  ManufacturedParams params;
  ScalarField exact_f, exact_g;
  std::function<Gradient(const Point2&)> grad_f, grad_g;
  ScalarField exact_a, exact_b, exact_c;
  ScalarField source_f, source_g;
};

/// Closed-form volumetric sources of the two manufactured invariants.
inline std::pair<ScalarField, ScalarField> manufactured_sources(const ManufacturedParams& p) {
  const double s = std::sin(p.theta), c = std::cos(p.theta);
  const double diag = p.d1 * (c * c / (p.lx * p.lx) + s * s / (p.ly * p.ly)) +
                      p.d2 * (s * s / (p.lx * p.lx) + c * c / (p.ly * p.ly));
  const double cross = pi * pi / (2.0 * p.lx * p.ly) * (p.d1 - p.d2) * s * c;
  const double kx = pi / (2.0 * p.lx), ky = pi / (2.0 * p.ly);
  ScalarField ff = [=](const Point2& x) {
    return pi * pi / 4.0 * std::sin(kx * x.x) * std::sin(ky * x.y) * diag -
           cross * std::cos(kx * x.x) * std::cos(ky * x.y);
  };
  ScalarField fg = [=](const Point2& x) {
    return pi * pi / 4.0 * std::cos(kx * x.x) * std::cos(ky * x.y) * diag -
           cross * std::sin(kx * x.x) * std::sin(ky * x.y);
  };
  return {ff, fg};
}

/**
 * c_F = sin(pi x / 2Lx) sin(pi y / 2Ly), c_G = cos(pi x / 2Lx) cos(pi y / 2Ly)
 * under D = R diag(d1, d2) R^T. Species data are chosen so that the
 * invariant transformation reproduces the manufactured invariants: A and B
 * carry the invariant sources, C carries none, and the Dirichlet data are
 * the exact species values.
 */
inline ManufacturedBenchmark manufactured(std::size_t seeds, ElementKind kind, ManufacturedParams p = {}) {
  ManufacturedBenchmark b;
  b.params = p;
  const double kx = pi / (2.0 * p.lx), ky = pi / (2.0 * p.ly);
  b.exact_f = [=](const Point2& x) { return std::sin(kx * x.x) * std::sin(ky * x.y); };
  b.exact_g = [=](const Point2& x) { return std::cos(kx * x.x) * std::cos(ky * x.y); };
  b.grad_f = [=](const Point2& x) {
    return Gradient{kx * std::cos(kx * x.x) * std::sin(ky * x.y), ky * std::sin(kx * x.x) * std::cos(ky * x.y)};
  };
  b.grad_g = [=](const Point2& x) {
    return Gradient{-kx * std::sin(kx * x.x) * std::cos(ky * x.y), -ky * std::cos(kx * x.x) * std::sin(ky * x.y)};
  };
  const auto st = p.stoichiometry;
  auto ef = b.exact_f, eg = b.exact_g;
  b.exact_a = [=](const Point2& x) { return recover_at(ef(x), eg(x), st, 0.0).a; };
  b.exact_b = [=](const Point2& x) { return recover_at(ef(x), eg(x), st, 0.0).b; };
  b.exact_c = [=](const Point2& x) { return recover_at(ef(x), eg(x), st, 0.0).c; };
  std::tie(b.source_f, b.source_g) = manufactured_sources(p);

  auto& s = b.spec;
  s.name = "manufactured";
  s.mesh = generate_structured({0.0, 0.0}, {p.lx, p.ly}, {seeds, seeds}, kind);
  s.diffusivity = rotated_orthotropic(p.theta, p.d1, p.d2);
  s.stoichiometry = st;
  s.a.source = [f = b.source_f](const Point2& x, double) { return f(x); };
  s.b.source = [g = b.source_g](const Point2& x, double) { return g(x); };
  for (const char* side : {"left", "right", "bottom", "top"}) {
    s.a.dirichlet[side] = [ea = b.exact_a](const Point2& x, double) { return ea(x); };
    s.b.dirichlet[side] = [eb = b.exact_b](const Point2& x, double) { return eb(x); };
    s.c.dirichlet[side] = [ec = b.exact_c](const Point2& x, double) { return ec(x); };
  }
  s.bounds_f = {0.0, 1.0};
  s.bounds_g = {0.0, 1.0};
  s.allow_signed_sources = true;
  return b;
}

// ---------------------------------------------------------------------------
// Stream-function velocity and subsurface dispersion tensor

struct StreamFunction {
  double lx = 2.0;
  double ly = 1.0;
  std::array<double, 3> p{4.0, 5.0, 10.0};
  std::array<double, 3> q{1.0, 5.0, 10.0};
  std::array<double, 3> amp{0.08, 0.02, 0.01};

  double psi(const Point2& x) const {
    double s = -x.y;
    for (std::size_t k = 0; k < 3; ++k)
      s -= amp[k] * std::cos(p[k] * pi * x.x / lx - pi / 2.0) * std::sin(q[k] * pi * x.y / ly);
    return s;
  }

  /// v = (-d psi / dy, d psi / dx).
  std::array<double, 2> velocity(const Point2& x) const {
    double vx = 1.0, vy = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double ax = p[k] * pi * x.x / lx - pi / 2.0;
      const double ay = q[k] * pi * x.y / ly;
      vx += amp[k] * q[k] * pi / ly * std::cos(ax) * std::cos(ay);
      vy += amp[k] * p[k] * pi / lx * std::sin(ax) * std::sin(ay);
    }
    return {vx, vy};
  }
};

inline constexpr double velocity_floor = 1e-12;

/// alpha_T |v| I + (alpha_L - alpha_T) / |v| v (x) v, falling back to alpha_T I when |v| vanishes.
inline TensorField subsurface_dispersion(StreamFunction sf, double alpha_l = 1.0, double alpha_t = 1e-4) {
  return [=](const Point2& x) {
    const auto [vx, vy] = sf.velocity(x);
    const double speed = std::hypot(vx, vy);
    if (speed < velocity_floor) return Tensor2(alpha_t * Tensor2::Identity());
    Eigen::Vector2d v(vx, vy);
    Tensor2 d = alpha_t * speed * Tensor2::Identity() + (alpha_l - alpha_t) / speed * (v * v.transpose());
    return d;
  };
}

// ---------------------------------------------------------------------------
// Reaction tank

inline ProblemSpec tank(std::size_t seeds, ElementKind kind = ElementKind::quad4) {
  const double lx = 2.0, ly = 1.0;
  ProblemSpec s;
  s.name = "tank";
  s.mesh = generate_structured({0.0, 0.0}, {lx, ly}, {seeds, seeds}, kind);
  s.mesh.set_all_roles(BcRole::neumann);
  s.mesh.split_marker("left", "inlet_a", BcRole::dirichlet, [=](const Point2& m) { return m.y < ly / 6.0; });
  s.mesh.split_marker("left", "inlet_b", BcRole::dirichlet, [=](const Point2& m) { return m.y > 5.0 * ly / 6.0; });
  s.diffusivity = subsurface_dispersion(StreamFunction{lx, ly});
  s.stoichiometry = {1.0, 1.0, 2.0};
  auto constant = [](double v) { return SpaceTimeField([v](const Point2&, double) { return v; }); };
  s.a.dirichlet = {{"inlet_a", constant(1.0)}, {"inlet_b", constant(0.0)}};
  s.b.dirichlet = {{"inlet_a", constant(0.0)}, {"inlet_b", constant(10.0)}};
  s.c.dirichlet = {{"inlet_a", constant(0.0)}, {"inlet_b", constant(0.0)}};
  s.bounds_f = {0.0, 1.0};
  s.bounds_g = {0.0, 10.0};
  return s;
}

// ---------------------------------------------------------------------------
// Stationary point sources

inline constexpr double point_source_epsilon = 0.001;

/// D0(x) = [[y^2 + eps x^2, -(1-eps) x y], [-(1-eps) x y, eps y^2 + x^2]].
inline Tensor2 point_source_base_tensor(const Point2& x, double eps = point_source_epsilon) {
  Tensor2 d;
  d << x.y * x.y + eps * x.x * x.x, -(1.0 - eps) * x.x * x.y, -(1.0 - eps) * x.x * x.y, eps * x.y * x.y + x.x * x.x;
  return d;
}

inline ProblemSpec point_sources(std::size_t seeds, ElementKind kind = ElementKind::quad4) {
  ProblemSpec s;
  s.name = "point_sources";
  s.mesh = generate_structured({0.0, 0.0}, {2.0, 1.0}, {seeds, seeds}, kind);
  s.diffusivity = rotate([](const Point2& x) { return point_source_base_tensor(x); }, pi / 3.0);
  s.stoichiometry = {1.0, 1.0, 2.0};
  s.a.point_sources = {{{0.2, 0.3}, 0.1}, {{1.6, 0.3}, 0.05}};
  s.b.point_sources = {{{1.6, 0.7}, 0.1}, {{0.2, 0.7}, 0.1}};
  auto zero = SpaceTimeField([](const Point2&, double) { return 0.0; });
  for (const char* side : {"left", "right", "bottom", "top"}) {
    s.a.dirichlet[side] = zero;
    s.b.dirichlet[side] = zero;
    s.c.dirichlet[side] = zero;
  }
  s.bounds_f = Bounds::nonnegative();
  s.bounds_g = Bounds::nonnegative();
  return s;
}

// ---------------------------------------------------------------------------
// Reacting slug

inline ProblemSpec slug(std::size_t seeds, double dt, double horizon = 1.0, ElementKind kind = ElementKind::quad4) {
  const double lx = 10.0, ly = 5.0;
  ProblemSpec s;
  s.name = "slug";
  s.mesh = generate_structured({0.0, 0.0}, {lx, ly}, {seeds, seeds}, kind);
  s.diffusivity = rotate(subsurface_dispersion(StreamFunction{lx, ly}), pi / 6.0);
  s.stoichiometry = {2.0, 2.0, 1.0};
  s.a.initial = [](const Point2& x) {
    return (x.x >= 4.0 && x.x <= 6.0 && x.y >= 2.0 && x.y <= 3.0) ? 10.0 : 0.0;
  };
  auto zero = SpaceTimeField([](const Point2&, double) { return 0.0; });
  auto ramp = SpaceTimeField([](const Point2&, double t) { return 1.0 - std::exp(-t); });
  for (const char* side : {"left", "right", "bottom", "top"}) {
    s.a.dirichlet[side] = zero;
    s.b.dirichlet[side] = ramp;
    s.c.dirichlet[side] = zero;
  }
  s.time = TimeControls{dt, horizon};
  s.bounds_f = Bounds::nonnegative();
  s.bounds_g = Bounds::nonnegative();
  return s;
}

// ---------------------------------------------------------------------------
// Comparison-principle counterexample

/// Interior-node operators of -u'' + alpha u on [0, length] with linear elements.
struct DecaySystem1D {
  SparseMatrix hessian;  // alpha M + K on interior nodes
  double alpha = 2e4;
  double length = 1.0;
  int elements = 6;
};

inline DecaySystem1D decay_system_1d(int elements = 6, double alpha = 2e4, double length = 1.0,
                                     double diffusivity = 1.0) {
  const int n = elements - 1;
  const double h = length / elements;
  std::vector<Eigen::Triplet<double>> t;
  for (int e = 0; e < elements; ++e) {
    // Element nodes e and e+1 map to interior indices e-1 and e.
    const int idx[2] = {e - 1, e};
    const double ke[2][2] = {{diffusivity / h, -diffusivity / h}, {-diffusivity / h, diffusivity / h}};
    const double me[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        if (idx[a] < 0 || idx[a] >= n || idx[b] < 0 || idx[b] >= n) continue;
        t.emplace_back(idx[a], idx[b], ke[a][b] + alpha * me[a][b]);
      }
    }
  }
  DecaySystem1D s;
  s.hessian.resize(n, n);
  s.hessian.setFromTriplets(t.begin(), t.end());
  s.alpha = alpha;
  s.length = length;
  s.elements = elements;
  return s;
}

struct ComparisonCounterexample {
  DecaySystem1D system;
  std::array<Vector, 3> loads;        // f1 <= f2 <= f3
  std::array<Vector, 3> galerkin;     // unconstrained solutions
  std::array<QpSolution, 3> constrained;  // non-negative solutions
  bool galerkin_violates = false;     // c3 >= c2 fails somewhere
  bool constrained_violates = false;
};

/// Nodes where @p hi < @p lo; empty when the ordering holds.
inline std::vector<int> ordering_violations(const Vector& lo, const Vector& hi, double tol = 0.0) {
  std::vector<int> out;
  for (int i = 0; i < lo.size(); ++i) {
    if (hi(i) < lo(i) - tol) out.push_back(i);
  }
  return out;
}

/**
 * f1 = 0, f2 = unit nodal load at the middle node, and f3 = f2 plus a unit
 * load at the first interior node (searched in index order) for which both
 * the galerkin and the non-negative solutions break c3 >= c2.
 */
inline ComparisonCounterexample comparison_counterexample(int elements = 6, double alpha = 2e4) {
  ComparisonCounterexample out;
  out.system = decay_system_1d(elements, alpha);
  const auto& h = out.system.hessian;
  const int n = static_cast<int>(h.rows());
  const Vector lower = Vector::Zero(n), upper = Vector::Constant(n, unbounded);
  const double tol = 1e-12;

  out.loads[0] = Vector::Zero(n);
  out.loads[1] = Vector::Zero(n);
  out.loads[1](n / 2) = 1.0;
  const SpdSolver spd(h);
  BoxQpSolver qp(h);
  for (int k = 0; k < 2; ++k) {
    out.galerkin[k] = spd.solve(out.loads[k]);
    out.constrained[k] = qp.solve(out.loads[k], lower, upper);
  }
  for (int j = 0; j < n; ++j) {
    Vector f3 = out.loads[1];
    f3(j) += 1.0;
    const Vector cg = spd.solve(f3);
    QpSolution cc = qp.solve(f3, lower, upper);
    const bool gv = !ordering_violations(out.galerkin[1], cg, tol).empty();
    const bool cv = !ordering_violations(out.constrained[1].c, cc.c, tol).empty();
    if (gv && cv) {
      out.loads[2] = f3;
      out.galerkin[2] = cg;
      out.constrained[2] = std::move(cc);
      out.galerkin_violates = true;
      out.constrained_violates = true;
      return out;
    }
  }
  throw SolverError("no single-node load increment breaks the comparison principle");
}

// ---------------------------------------------------------------------------
// Registry

inline const std::vector<std::string>& benchmark_ids() {
  static const std::vector<std::string> ids{"manufactured", "tank", "point_sources", "slug",
                                            "comparison_counterexample"};
  return ids;
}

inline bool is_benchmark(const std::string& id) {
  for (const auto& b : benchmark_ids())
    if (b == id) return true;
  return false;
}

struct BenchmarkConfig {
  std::size_t seeds = 21;
  ElementKind kind = ElementKind::quad4;
  double dt = 0.05;
  double horizon = 1.0;
};

/// ProblemSpec for a 2D benchmark id (everything but the 1D counterexample).
inline ProblemSpec make_problem(const std::string& id, const BenchmarkConfig& cfg) {
  if (id == "manufactured") return manufactured(cfg.seeds, cfg.kind).spec;
  if (id == "tank") return tank(cfg.seeds, cfg.kind);
  if (id == "point_sources") return point_sources(cfg.seeds, cfg.kind);
  if (id == "slug") return slug(cfg.seeds, cfg.dt, cfg.horizon, cfg.kind);
  throw std::invalid_argument("no 2D problem registered under '" + id + "'");
}

}  // namespace nnfem::bench
