#pragma once

/**
 * @file reaction.hpp
 * @brief Fast irreversible bimolecular reaction n_A A + n_B B -> n_C C.
 *
 * The two invariants
 *
 *     c_F = c_A + (n_A / n_C) c_C,    c_G = c_B + (n_B / n_C) c_C
 *
 * obey uncoupled diffusion equations. Species are recovered pointwise
 * from the invariants since A and B cannot co-exist.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nnfem/assembly.hpp"
#include "nnfem/boxqp.hpp"
#include "nnfem/mesh.hpp"
#include "nnfem/solvers.hpp"
#include "nnfem/tensor_field.hpp"

namespace nnfem {

using SpaceTimeField = std::function<double(const Point2&, double)>;

class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Stoichiometry {
  double n_a = 1.0;
  double n_b = 1.0;
  double n_c = 1.0;

  void validate() const {
    if (!(n_a > 0.0) || !(n_b > 0.0) || !(n_c > 0.0))
      throw ProblemError("stoichiometric coefficients must be positive");
  }
};

/// Source, boundary and initial data of one species (or one invariant).
struct SpeciesData {
  SpaceTimeField source;                          // empty means zero
  std::vector<PointLoad> point_sources;           // constant rates
  std::map<std::string, SpaceTimeField> dirichlet;
  std::map<std::string, SpaceTimeField> neumann;  // missing markers are zero-flux
  ScalarField initial;                            // empty means zero
};

struct TimeControls {
  double dt = 0.0;
  double horizon = 0.0;

  int steps() const { return static_cast<int>(std::llround(horizon / dt)); }
};

struct ProblemSpec {
  std::string name;
  Mesh mesh;
  TensorField diffusivity;
  Stoichiometry stoichiometry;
  SpeciesData a, b, c;
  std::optional<TimeControls> time;  // empty: steady
  Bounds bounds_f = Bounds::nonnegative();
  Bounds bounds_g = Bounds::nonnegative();
  /// Manufactured-solution problems need sources of either sign.
  bool allow_signed_sources = false;

  bool steady() const { return !time.has_value(); }

  /// Checks mesh, stoichiometry, marker coverage and non-negativity of all
  /// data sampled at nodes, element centroids and edge midpoints.
  void validate() const {
    mesh.validate();
    stoichiometry.validate();
    bounds_f.validate();
    bounds_g.validate();
    if (!diffusivity) throw ProblemError("diffusivity is not set");
    if (steady() && !mesh.has_dirichlet()) throw ProblemError("steady problems need a Dirichlet boundary");
    if (time) {
      if (!(time->dt > 0.0) || !(time->horizon > 0.0) || time->steps() <= 0)
        throw ProblemError("time controls need dt > 0 and horizon > 0");
    }
    std::vector<double> times{0.0};
    if (time) times = {0.0, 0.5 * time->horizon, time->horizon};

    for (const auto* s : {&a, &b, &c}) {
      for (const auto& [marker, fn] : s->dirichlet) {
        if (!mesh.markers().count(marker) || mesh.role(marker) != BcRole::dirichlet)
          throw ProblemError("Dirichlet data on non-Dirichlet marker '" + marker + "'");
      }
      for (const auto& [marker, fn] : s->neumann) {
        if (!mesh.markers().count(marker) || mesh.role(marker) != BcRole::neumann)
          throw ProblemError("Neumann data on non-Neumann marker '" + marker + "'");
      }
      for (const auto& ps : s->point_sources) {
        if (ps.value < 0.0) throw ProblemError(name + ": negative point source rate");
      }
      for (double t : times) {
        if (s->source && !allow_signed_sources) {
          for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            const auto p = mesh.element_coords(e);
            Point2 ctr{0.0, 0.0};
            for (const auto& q : p) {
              ctr.x += q.x / double(p.size());
              ctr.y += q.y / double(p.size());
              if (s->source(q, t) < 0.0) throw ProblemError(name + ": negative volumetric source");
            }
            if (s->source(ctr, t) < 0.0) throw ProblemError(name + ": negative volumetric source");
          }
        }
        for (const auto& edge : mesh.boundary_edges()) {
          const Point2 mid{0.5 * (mesh.node(edge.a).x + mesh.node(edge.b).x),
                           0.5 * (mesh.node(edge.a).y + mesh.node(edge.b).y)};
          const auto* table = mesh.role(edge.marker) == BcRole::dirichlet ? &s->dirichlet : &s->neumann;
          auto it = table->find(edge.marker);
          if (it == table->end() || !it->second) continue;
          for (const auto& q : {mesh.node(edge.a), mesh.node(edge.b), mid}) {
            if (it->second(q, t) < 0.0) throw ProblemError(name + ": negative boundary data on '" + edge.marker + "'");
          }
        }
      }
      if (s->initial) {
        for (const auto& q : mesh.nodes()) {
          if (s->initial(q) < 0.0) throw ProblemError(name + ": negative initial data");
        }
      }
    }
  }
};

/// Transformed data for one invariant together with its bounds.
struct InvariantProblem {
  std::string quantity;  // "F" or "G"
  SpeciesData data;
  Bounds bounds;
};

namespace detail {

inline SpaceTimeField combine(const SpaceTimeField& x, const SpaceTimeField& y, double ratio) {
  if (!x && !y) return {};
  return [x, y, ratio](const Point2& p, double t) {
    return (x ? x(p, t) : 0.0) + ratio * (y ? y(p, t) : 0.0);
  };
}

inline SpeciesData combine_species(const Mesh& mesh, const SpeciesData& reactant, const SpeciesData& product,
                                   double ratio) {
  SpeciesData out;
  out.source = combine(reactant.source, product.source, ratio);
  out.point_sources = reactant.point_sources;
  for (auto ps : product.point_sources) {
    ps.value *= ratio;
    out.point_sources.push_back(ps);
  }
  std::set<std::string> dir_markers, neu_markers;
  for (const auto& [m, role] : mesh.markers()) (role == BcRole::dirichlet ? dir_markers : neu_markers).insert(m);
  auto lookup = [](const std::map<std::string, SpaceTimeField>& t, const std::string& m) -> SpaceTimeField {
    auto it = t.find(m);
    return it == t.end() ? SpaceTimeField{} : it->second;
  };
  for (const auto& m : dir_markers) {
    auto f = combine(lookup(reactant.dirichlet, m), lookup(product.dirichlet, m), ratio);
    out.dirichlet[m] = f ? f : SpaceTimeField([](const Point2&, double) { return 0.0; });
  }
  for (const auto& m : neu_markers) {
    auto f = combine(lookup(reactant.neumann, m), lookup(product.neumann, m), ratio);
    if (f) out.neumann[m] = f;
  }
  if (reactant.initial || product.initial) {
    out.initial = [ri = reactant.initial, pi = product.initial, ratio](const Point2& p) {
      return (ri ? ri(p) : 0.0) + ratio * (pi ? pi(p) : 0.0);
    };
  }
  return out;
}

}  // namespace detail

/**
 * F gets f_A + (n_A/n_C) f_C and the same combination of Dirichlet,
 * Neumann and initial data; G is built analogously from B and C.
 */
inline std::pair<InvariantProblem, InvariantProblem> to_invariants(const ProblemSpec& spec) {
  const auto& st = spec.stoichiometry;
  st.validate();
  return {InvariantProblem{"F", detail::combine_species(spec.mesh, spec.a, spec.c, st.n_a / st.n_c), spec.bounds_f},
          InvariantProblem{"G", detail::combine_species(spec.mesh, spec.b, spec.c, st.n_b / st.n_c), spec.bounds_g}};
}

struct SpeciesValues {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/**
 * Pointwise recovery. With d = c_F - (n_A/n_B) c_G, values of d inside
 * [-eps, eps] are treated as the reaction interface (A = B = 0).
 */
inline SpeciesValues recover_at(double cf, double cg, const Stoichiometry& st, double eps = machine_epsilon) {
  const double d = cf - (st.n_a / st.n_b) * cg;
  if (d > eps) return {d, 0.0, (st.n_c / st.n_b) * cg};
  if (d < -eps) return {0.0, std::max(0.0, cg - (st.n_b / st.n_a) * cf), (st.n_c / st.n_a) * cf};
  return {0.0, 0.0, (st.n_c / st.n_a) * cf};
}

struct SpeciesFields {
  NodalField a, b, c;
};

inline SpeciesFields recover_species(const NodalField& cf, const NodalField& cg, const Stoichiometry& st,
                                     double eps = machine_epsilon) {
  if (cf.values.size() != cg.values.size()) throw std::invalid_argument("invariant fields differ in size");
  const auto n = cf.values.size();
  SpeciesFields out{{Vector(n), "A", cf.formulation, cf.time},
                    {Vector(n), "B", cf.formulation, cf.time},
                    {Vector(n), "C", cf.formulation, cf.time}};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto s = recover_at(cf.values(i), cg.values(i), st, eps);
    out.a.values(i) = s.a;
    out.b.values(i) = s.b;
    out.c.values(i) = s.c;
  }
  return out;
}

struct RunOptions {
  QpOptions qp;
  double recovery_eps = machine_epsilon;
  int quadrature_order = default_quadrature_order;
  bool concurrent = true;  // solve F and G on separate threads
};

struct SteadyRun {
  Formulation formulation = Formulation::galerkin;
  SteadySolution f, g;
  SpeciesFields species;
  AssembledSystem system;
};

struct TransientLevel {
  double time = 0.0;
  NodalField f, g;
  SpeciesFields species;
  std::optional<QpSolution> qp_f, qp_g;
};

struct TransientRun {
  Formulation formulation = Formulation::galerkin;
  std::vector<TransientLevel> levels;  // levels[0] is the initial state
};

namespace detail {

inline LoadData load_at(const SpeciesData& d, double t) {
  LoadData l;
  if (d.source) l.source = [s = d.source, t](const Point2& p) { return s(p, t); };
  l.point_loads = d.point_sources;
  for (const auto& [m, fn] : d.neumann) l.neumann[m] = [fn, t](const Point2& p) { return fn(p, t); };
  return l;
}

inline DirichletData dirichlet_at(const SpeciesData& d, double t) {
  DirichletData out;
  for (const auto& [m, fn] : d.dirichlet) out[m] = [fn, t](const Point2& p) { return fn(p, t); };
  return out;
}

template <class Fn>
auto run_pair(bool concurrent, Fn&& f, Fn&& g) {
  if (!concurrent) return std::make_pair(f(), g());
  auto fut = std::async(std::launch::async, std::forward<Fn>(g));
  auto first = f();
  return std::make_pair(std::move(first), fut.get());
}

}  // namespace detail

/// Invariant transformation, two steady solves and species recovery.
inline SteadyRun run_steady(const ProblemSpec& spec, Formulation formulation, const RunOptions& opt = {}) {
  spec.validate();
  if (!spec.steady()) throw ProblemError(spec.name + " is transient; use run_transient");
  const auto [pf, pg] = to_invariants(spec);
  SteadyRun run;
  run.formulation = formulation;
  run.system = assemble_operators(spec.mesh, spec.diffusivity, opt.quadrature_order);
  const auto& sys = run.system;

  using Solve = std::function<SteadySolution()>;
  Solve solve_f = [&] {
    const Vector f = assemble_load(spec.mesh, detail::load_at(pf.data, 0.0), opt.quadrature_order);
    const Vector dv = dirichlet_values(spec.mesh, sys, detail::dirichlet_at(pf.data, 0.0));
    return solve_steady(sys, dv, f, pf.bounds, formulation, {opt.qp, "F"});
  };
  Solve solve_g = [&] {
    const Vector f = assemble_load(spec.mesh, detail::load_at(pg.data, 0.0), opt.quadrature_order);
    const Vector dv = dirichlet_values(spec.mesh, sys, detail::dirichlet_at(pg.data, 0.0));
    return solve_steady(sys, dv, f, pg.bounds, formulation, {opt.qp, "G"});
  };
  auto [sf, sg] = detail::run_pair(opt.concurrent, solve_f, solve_g);
  run.f = std::move(sf);
  run.g = std::move(sg);
  run.species = recover_species(run.f.field, run.g.field, spec.stoichiometry, opt.recovery_eps);
  return run;
}

/// Nodal interpolant of an initial condition.
inline Vector interpolate(const Mesh& mesh, const ScalarField& fn) {
  Vector v = Vector::Zero(static_cast<int>(mesh.num_nodes()));
  if (!fn) return v;
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) v(static_cast<int>(i)) = fn(mesh.node(i));
  return v;
}

/**
 * Backward-Euler time loop for both invariants with species recovery at
 * every level. Operators are assembled once; each invariant keeps its own
 * stepper (factorization or warm-started QP).
 */
inline TransientRun run_transient(const ProblemSpec& spec, Formulation formulation, const RunOptions& opt = {}) {
  spec.validate();
  if (spec.steady()) throw ProblemError(spec.name + " is steady; use run_steady");
  const auto [pf, pg] = to_invariants(spec);
  const double dt = spec.time->dt;
  const int n_steps = spec.time->steps();

  const AssembledSystem sys = assemble_operators(spec.mesh, spec.diffusivity, opt.quadrature_order);
  auto make_data = [&](const InvariantProblem& p) {
    TimeDependentData d;
    d.load = [&spec, &p, order = opt.quadrature_order](double t) {
      return assemble_load(spec.mesh, detail::load_at(p.data, t), order);
    };
    d.dirichlet = [&spec, &sys, &p](double t) { return dirichlet_values(spec.mesh, sys, detail::dirichlet_at(p.data, t)); };
    return d;
  };
  const TimeDependentData df = make_data(pf), dg = make_data(pg);

  TransientRun run;
  run.formulation = formulation;
  TransientLevel init;
  init.time = 0.0;
  init.f = {interpolate(spec.mesh, pf.data.initial), "F", formulation, 0.0};
  init.g = {interpolate(spec.mesh, pg.data.initial), "G", formulation, 0.0};
  init.species = recover_species(init.f, init.g, spec.stoichiometry, opt.recovery_eps);
  run.levels.push_back(init);

  using Series = std::function<std::vector<SteadySolution>()>;
  Series series_f = [&] {
    return solve_transient(sys, df, init.f, pf.bounds, formulation, dt, n_steps, {opt.qp, "F"});
  };
  Series series_g = [&] {
    return solve_transient(sys, dg, init.g, pg.bounds, formulation, dt, n_steps, {opt.qp, "G"});
  };
  auto [lf, lg] = detail::run_pair(opt.concurrent, series_f, series_g);
  for (int n = 0; n < n_steps; ++n) {
    TransientLevel lvl;
    lvl.time = dt * double(n + 1);
    lvl.f = std::move(lf[n].field);
    lvl.g = std::move(lg[n].field);
    lvl.qp_f = std::move(lf[n].qp);
    lvl.qp_g = std::move(lg[n].qp);
    lvl.species = recover_species(lvl.f, lvl.g, spec.stoichiometry, opt.recovery_eps);
    run.levels.push_back(std::move(lvl));
  }
  return run;
}

}  // namespace nnfem
