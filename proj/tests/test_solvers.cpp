#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nnfem/assembly.hpp"
#include "nnfem/benchmarks.hpp"
#include "nnfem/solvers.hpp"

using namespace nnfem;

namespace {

struct Case {
  Mesh mesh;
  AssembledSystem sys;
  Vector f;
};

Case point_source_setup(std::size_t seeds) {
  const auto spec = bench::point_sources(seeds);
  Case s{spec.mesh, assemble_operators(spec.mesh, spec.diffusivity), {}};
  const auto inv = to_invariants(spec).first;
  s.f = assemble_load(s.mesh, nnfem::detail::load_at(inv.data, 0.0));
  s.sys.dirichlet_values = Vector::Zero(static_cast<int>(s.sys.dirichlet_nodes.size()));
  return s;
}

Case isotropic_setup(std::size_t seeds, bool neumann_everywhere) {
  Mesh mesh = generate_structured({0.0, 0.0}, {1.0, 1.0}, {seeds, seeds}, ElementKind::quad4);
  if (neumann_everywhere) mesh.set_all_roles(BcRole::neumann);
  Case s{mesh, assemble_operators(mesh, constant_tensor(Eigen::Matrix2d::Identity())), {}};
  s.f = Vector::Zero(static_cast<int>(mesh.num_nodes()));
  s.sys.dirichlet_values = Vector::Zero(static_cast<int>(s.sys.dirichlet_nodes.size()));
  return s;
}

NodalField field(Vector v) { return {std::move(v), "F", Formulation::galerkin, std::nullopt}; }

}  // namespace

TEST(Formulation, RoundTripsNames) {
  for (auto f : {Formulation::galerkin, Formulation::clipped, Formulation::constrained})
    EXPECT_EQ(parse_formulation(to_string(f)), f);
  EXPECT_THROW(parse_formulation("upwind"), std::invalid_argument);
}

TEST(BoundsTest, Validation) {
  EXPECT_NO_THROW(Bounds::nonnegative().validate());
  EXPECT_NO_THROW(Bounds::none().validate());
  EXPECT_THROW((Bounds{1.0, 0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((Bounds{std::nan(""), 1.0}).validate(), std::invalid_argument);
}

TEST(Steady, ZeroDataGivesZeroForEveryFormulation) {
  const Case s = isotropic_setup(9, false);
  for (auto form : {Formulation::galerkin, Formulation::clipped, Formulation::constrained}) {
    const SteadySolution sol = solve_steady(s.sys, s.f, Bounds::nonnegative(), form);
    EXPECT_EQ(sol.field.values.cwiseAbs().maxCoeff(), 0.0) << to_string(form);
  }
}

TEST(Steady, ClippedFieldRespectsBoundsExactly) {
  const Case s = point_source_setup(21);
  const SteadySolution gal = solve_steady(s.sys, s.f, Bounds::nonnegative(), Formulation::galerkin);
  ASSERT_LT(gal.field.min(), 0.0);
  const SteadySolution clip = solve_steady(s.sys, s.f, Bounds::nonnegative(), Formulation::clipped);
  EXPECT_GE(clip.field.min(), 0.0);
  for (int i = 0; i < gal.field.values.size(); ++i)
    EXPECT_EQ(clip.field.values(i), std::max(0.0, gal.field.values(i)));
}

TEST(Steady, ConstrainedSolutionIsFeasibleWithSignedMultipliers) {
  const Case s = point_source_setup(21);
  const SteadySolution con = solve_steady(s.sys, s.f, Bounds::nonnegative(), Formulation::constrained);
  ASSERT_TRUE(con.qp.has_value());
  EXPECT_GE(con.field.min(), 0.0);
  EXPECT_GE(con.lambda_min.min(), 0.0);
  EXPECT_EQ(con.lambda_max.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(con.qp->kkt.worst_relative(), 1e3 * machine_epsilon);
  for (int i = 0; i < con.field.values.size(); ++i) {
    if (con.lambda_min.values(i) > 0.0) {
      EXPECT_EQ(con.field.values(i), 0.0);
    }
  }
  for (std::size_t k = 0; k < s.sys.dirichlet_nodes.size(); ++k) {
    EXPECT_EQ(con.lambda_min.values(s.sys.dirichlet_nodes[k]), 0.0);
    EXPECT_EQ(con.field.values(s.sys.dirichlet_nodes[k]), 0.0);
  }
}

TEST(Steady, ConstrainedMatchesGalerkinWhenBoundsInactive) {
  const Case s = point_source_setup(21);
  const SteadySolution gal = solve_steady(s.sys, s.f, Bounds::none(), Formulation::galerkin);
  const Bounds wide{gal.field.min() - 1.0, gal.field.max() + 1.0};
  const SteadySolution con = solve_steady(s.sys, s.f, wide, Formulation::constrained);
  const double scale = gal.field.values.cwiseAbs().maxCoeff();
  EXPECT_LE((con.field.values - gal.field.values).cwiseAbs().maxCoeff(), 1e-10 * scale);
  EXPECT_EQ(con.qp->active_lower() + con.qp->active_upper(), 0u);
}

TEST(Steady, DirichletValuesArePlacedVerbatim) {
  const Case s = isotropic_setup(7, false);
  const Vector bc = Vector::Constant(static_cast<int>(s.sys.dirichlet_nodes.size()), 0.25);
  for (auto form : {Formulation::galerkin, Formulation::constrained}) {
    const SteadySolution sol = solve_steady(s.sys, bc, s.f, Bounds::nonnegative(), form);
    // A constant is in the kernel of K, so the harmonic extension of 0.25 is 0.25.
    EXPECT_LE((sol.field.values.array() - 0.25).abs().maxCoeff(), 1e-13) << to_string(form);
  }
}

TEST(Steady, NeedsDirichletNodes) {
  const Case s = isotropic_setup(5, true);
  EXPECT_THROW(solve_steady(s.sys, s.f, Bounds::none(), Formulation::galerkin), std::invalid_argument);
}

TEST(Transient, ZeroDataGivesZeroTrajectory) {
  const Case s = isotropic_setup(7, false);
  const int nd = static_cast<int>(s.sys.dirichlet_nodes.size());
  const TimeDependentData data{[&](double) { return s.f; }, [nd](double) { return Vector::Zero(nd); }};
  const NodalField init = field(Vector::Zero(static_cast<int>(s.mesh.num_nodes())));
  for (auto form : {Formulation::galerkin, Formulation::clipped, Formulation::constrained}) {
    const auto levels = solve_transient(s.sys, data, init, Bounds::nonnegative(), form, 0.1, 5);
    ASSERT_EQ(levels.size(), 5u);
    for (const auto& l : levels) EXPECT_EQ(l.field.values.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Transient, RejectsBadArguments) {
  const Case s = isotropic_setup(5, false);
  const int nd = static_cast<int>(s.sys.dirichlet_nodes.size());
  const TimeDependentData data{[&](double) { return s.f; }, [nd](double) { return Vector::Zero(nd); }};
  const NodalField init = field(Vector::Zero(static_cast<int>(s.mesh.num_nodes())));
  EXPECT_THROW(solve_transient(s.sys, data, init, Bounds::nonnegative(), Formulation::galerkin, 0.1, 0),
               std::invalid_argument);
  EXPECT_THROW(solve_transient(s.sys, data, init, Bounds::nonnegative(), Formulation::galerkin, -0.1, 3),
               std::invalid_argument);
  NodalField negative = init;
  negative.values(12) = -1.0;
  EXPECT_THROW(solve_transient(s.sys, data, negative, Bounds::nonnegative(), Formulation::constrained, 0.1, 3),
               std::invalid_argument);
  EXPECT_NO_THROW(solve_transient(s.sys, data, negative, Bounds::nonnegative(), Formulation::galerkin, 0.1, 3));
  const NodalField wrong = field(Vector::Zero(3));
  EXPECT_THROW(solve_transient(s.sys, data, wrong, Bounds::nonnegative(), Formulation::galerkin, 0.1, 3),
               std::invalid_argument);
}

TEST(Transient, DirichletValuesTakenAtNewTime) {
  const Case s = isotropic_setup(5, false);
  const int nd = static_cast<int>(s.sys.dirichlet_nodes.size());
  const TimeDependentData data{[&](double) { return s.f; }, [nd](double t) { return Vector::Constant(nd, t); }};
  const NodalField init = field(Vector::Zero(static_cast<int>(s.mesh.num_nodes())));
  const auto levels = solve_transient(s.sys, data, init, Bounds::nonnegative(), Formulation::constrained, 0.25, 4);
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const double t = 0.25 * double(n + 1);
    EXPECT_DOUBLE_EQ(*levels[n].field.time, t);
    for (auto node : s.sys.dirichlet_nodes) EXPECT_EQ(levels[n].field.values(node), t);
  }
}

TEST(Transient, BackwardEulerIsFirstOrderInTime) {
  // Pure Neumann heat equation with a cosine initial state; the temporal
  // error is estimated from successive halvings of dt on a fixed mesh.
  const Case s = isotropic_setup(17, true);
  const TimeDependentData data{[&](double) { return s.f; }, [](double) { return Vector(); }};
  NodalField init = field(Vector(static_cast<int>(s.mesh.num_nodes())));
  for (std::size_t i = 0; i < s.mesh.num_nodes(); ++i)
    init.values(static_cast<int>(i)) = 1.0 + std::cos(std::numbers::pi * s.mesh.node(i).x);
  const double horizon = 0.1;
  std::vector<Vector> finals;
  for (int steps : {10, 20, 40, 80}) {
    const auto levels =
        solve_transient(s.sys, data, init, Bounds::nonnegative(), Formulation::galerkin, horizon / steps, steps);
    EXPECT_NEAR(*levels.back().field.time, horizon, 1e-14);
    finals.push_back(levels.back().field.values);
  }
  for (std::size_t k = 0; k + 2 < finals.size(); ++k) {
    const double d1 = (finals[k] - finals[k + 1]).cwiseAbs().maxCoeff();
    const double d2 = (finals[k + 1] - finals[k + 2]).cwiseAbs().maxCoeff();
    EXPECT_NEAR(std::log2(d1 / d2), 1.0, 0.1);
  }
}

TEST(Transient, ConservesMassWithoutSourcesOrFluxes) {
  const Case s = isotropic_setup(9, true);
  const TimeDependentData data{[&](double) { return s.f; }, [](double) { return Vector(); }};
  NodalField init = field(Vector::Zero(static_cast<int>(s.mesh.num_nodes())));
  init.values(40) = 3.0;
  const double mass0 = (s.sys.capacity * init.values).sum();
  for (auto form : {Formulation::galerkin, Formulation::constrained}) {
    const auto levels = solve_transient(s.sys, data, init, Bounds::none(), form, 0.01, 10);
    for (const auto& l : levels) EXPECT_NEAR((s.sys.capacity * l.field.values).sum(), mass0, 1e-12 * mass0);
  }
}
