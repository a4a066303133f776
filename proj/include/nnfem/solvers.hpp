#pragma once

/**
 * @file solvers.hpp
 * @brief Steady and backward-Euler transient solves of one diffusion
 *        (with decay) equation under the galerkin, clipped and
 *        constrained formulations.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nnfem/assembly.hpp"
#include "nnfem/boxqp.hpp"

namespace nnfem {

enum class Formulation { galerkin, clipped, constrained };

inline std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::galerkin: return "galerkin";
    case Formulation::clipped: return "clipped";
    case Formulation::constrained: return "constrained";
  }
  return "?";
}

inline Formulation parse_formulation(const std::string& s) {
  if (s == "galerkin") return Formulation::galerkin;
  if (s == "clipped") return Formulation::clipped;
  if (s == "constrained") return Formulation::constrained;
  throw std::invalid_argument("unknown formulation '" + s + "'");
}

/// Scalar bounds on nodal values; infinite members mean "no bound".
struct Bounds {
  double min = 0.0;
  double max = unbounded;

  static Bounds nonnegative() { return {0.0, unbounded}; }
  static Bounds none() { return {-unbounded, unbounded}; }

  void validate() const {
    if (std::isnan(min) || std::isnan(max) || min > max) throw std::invalid_argument("bounds require min <= max");
  }
};

struct NodalField {
  Vector values;
  std::string quantity;  // "F", "G", "A", "B", "C", "lambda_min_F", ...
  Formulation formulation = Formulation::galerkin;
  std::optional<double> time;  // empty for steady

  double min() const { return values.size() ? values.minCoeff() : 0.0; }
  double max() const { return values.size() ? values.maxCoeff() : 0.0; }
};

struct SolveOptions {
  QpOptions qp;
  std::string quantity = "F";
};

struct SteadySolution {
  NodalField field;
  std::optional<QpSolution> qp;  // constrained only; indexed by free dofs
  NodalField lambda_min;         // full nodal, zero at Dirichlet nodes
  NodalField lambda_max;
};

namespace detail {

inline Vector scatter_free(const AssembledSystem& sys, const Vector& free_values) {
  Vector full = Vector::Zero(static_cast<int>(sys.num_dofs()));
  for (std::size_t k = 0; k < sys.free_dofs.size(); ++k) full(sys.free_dofs[k]) = free_values(k);
  return full;
}

inline Vector full_from(const AssembledSystem& sys, const Vector& free_values, const Vector& dirichlet) {
  Vector full(static_cast<int>(sys.num_dofs()));
  for (std::size_t k = 0; k < sys.free_dofs.size(); ++k) full(sys.free_dofs[k]) = free_values(k);
  for (std::size_t k = 0; k < sys.dirichlet_nodes.size(); ++k) full(sys.dirichlet_nodes[k]) = dirichlet(k);
  return full;
}

inline Vector eliminate(const Partition& p, const AssembledSystem& sys, const Vector& full_rhs,
                        const Vector& dirichlet) {
  Vector g = sys.restrict_free(full_rhs);
  if (dirichlet.size() > 0) g.noalias() -= p.fd * dirichlet;
  return g;
}

inline SteadySolution package(const AssembledSystem& sys, Vector full, Formulation formulation,
                              const std::string& quantity, std::optional<double> time,
                              std::optional<QpSolution> qp) {
  SteadySolution out;
  out.field = {std::move(full), quantity, formulation, time};
  if (qp) {
    out.lambda_min = {scatter_free(sys, qp->lambda_min), "lambda_min_" + quantity, formulation, time};
    out.lambda_max = {scatter_free(sys, qp->lambda_max), "lambda_max_" + quantity, formulation, time};
  } else {
    const Vector z = Vector::Zero(static_cast<int>(sys.num_dofs()));
    out.lambda_min = {z, "lambda_min_" + quantity, formulation, time};
    out.lambda_max = {z, "lambda_max_" + quantity, formulation, time};
  }
  out.qp = std::move(qp);
  return out;
}

inline Vector clip(Vector v, const Bounds& b) { return v.cwiseMax(b.min).cwiseMin(b.max); }

}  // namespace detail

/**
 * Solves K c = f on the free dofs (Dirichlet values from @p dirichlet).
 * The constrained formulation solves the box QP with bounds
 * [bounds.min, bounds.max] on every free dof.
 */
inline SteadySolution solve_steady(const AssembledSystem& sys, const Vector& dirichlet, const Vector& f,
                                   const Bounds& bounds, Formulation formulation, const SolveOptions& opt = {}) {
  bounds.validate();
  if (sys.dirichlet_nodes.empty())
    throw std::invalid_argument("steady solve needs at least one Dirichlet node");
  const Partition p = partition(sys.stiffness, sys);
  const Vector g = detail::eliminate(p, sys, f, dirichlet);
  const auto nf = static_cast<int>(sys.num_free());

  if (formulation == Formulation::constrained) {
    BoxQpSolver qp(p.ff, opt.qp);
    QpSolution s = qp.solve(g, Vector::Constant(nf, bounds.min), Vector::Constant(nf, bounds.max));
    Vector full = detail::full_from(sys, s.c, dirichlet);
    return detail::package(sys, std::move(full), formulation, opt.quantity, std::nullopt, std::move(s));
  }
  Vector full = detail::full_from(sys, solve_unconstrained(p.ff, g), dirichlet);
  if (formulation == Formulation::clipped) full = detail::clip(std::move(full), bounds);
  return detail::package(sys, std::move(full), formulation, opt.quantity, std::nullopt, std::nullopt);
}

inline SteadySolution solve_steady(const AssembledSystem& sys, const Vector& f, const Bounds& bounds,
                                   Formulation formulation, const SolveOptions& opt = {}) {
  return solve_steady(sys, sys.dirichlet_values, f, bounds, formulation, opt);
}

/**
 * Backward-Euler stepper for (M/dt + K) c^{n+1} = f^{n+1} + (M/dt) c^n.
 * The operator and its factorization (galerkin, clipped) or QP solver
 * (constrained, warm-started from the previous level) are built once.
 * Clipped states are fed forward as the next level's history.
 */
class TransientStepper {
 public:
  TransientStepper(const AssembledSystem& sys, double dt, Bounds bounds, Formulation formulation,
                   SolveOptions opt = {})
      : sys_(sys), dt_(dt), bounds_(bounds), formulation_(formulation), opt_(std::move(opt)) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    bounds_.validate();
    const SparseMatrix h = (sys.capacity / dt + sys.stiffness).pruned();
    part_ = partition(h, sys);
    if (formulation_ == Formulation::constrained) {
      qp_.emplace(part_.ff, opt_.qp);
    } else {
      spd_.factorize(part_.ff);
    }
  }

  double dt() const { return dt_; }

  /// Advances from the full nodal state @p previous to time @p t_next.
  SteadySolution step(const Vector& previous, double t_next, const Vector& f_next, const Vector& dirichlet_next) {
    const Vector rhs = f_next + (sys_.capacity * previous) / dt_;
    const Vector g = detail::eliminate(part_, sys_, rhs, dirichlet_next);
    const auto nf = static_cast<int>(sys_.num_free());
    if (formulation_ == Formulation::constrained) {
      std::optional<Vector> warm;
      if (last_free_) warm = *last_free_;
      QpSolution s = qp_->solve(g, Vector::Constant(nf, bounds_.min), Vector::Constant(nf, bounds_.max), warm);
      last_free_ = s.c;
      Vector full = detail::full_from(sys_, s.c, dirichlet_next);
      return detail::package(sys_, std::move(full), formulation_, opt_.quantity, t_next, std::move(s));
    }
    Vector full = detail::full_from(sys_, spd_.solve(g), dirichlet_next);
    if (formulation_ == Formulation::clipped) full = detail::clip(std::move(full), bounds_);
    return detail::package(sys_, std::move(full), formulation_, opt_.quantity, t_next, std::nullopt);
  }

 private:
  const AssembledSystem& sys_;
  double dt_;
  Bounds bounds_;
  Formulation formulation_;
  SolveOptions opt_;
  Partition part_;
  SpdSolver spd_;
  std::optional<BoxQpSolver> qp_;
  std::optional<Vector> last_free_;
};

/// Load vector and Dirichlet values at a given time.
struct TimeDependentData {
  std::function<Vector(double)> load;       // full nodal f(t)
  std::function<Vector(double)> dirichlet;  // values at sys.dirichlet_nodes
};

/**
 * Runs @p n_steps backward-Euler levels from @p initial. Returns levels
 * 1..n_steps (the initial state is not repeated).
 */
inline std::vector<SteadySolution> solve_transient(const AssembledSystem& sys, const TimeDependentData& data,
                                                   const NodalField& initial, const Bounds& bounds,
                                                   Formulation formulation, double dt, int n_steps,
                                                   const SolveOptions& opt = {}, double t0 = 0.0) {
  if (n_steps <= 0) throw std::invalid_argument("transient solve needs at least one step");
  if (initial.values.size() != static_cast<int>(sys.num_dofs()))
    throw std::invalid_argument("initial field has the wrong size");
  if (formulation == Formulation::constrained) {
    const double slack = 10.0 * opt.qp.tol * std::max(1.0, initial.values.cwiseAbs().maxCoeff());
    if (initial.values.minCoeff() < bounds.min - slack || initial.values.maxCoeff() > bounds.max + slack)
      throw std::invalid_argument("initial field violates the bounds of the constrained formulation");
  }
  TransientStepper stepper(sys, dt, bounds, formulation, opt);
  std::vector<SteadySolution> out;
  out.reserve(static_cast<std::size_t>(n_steps));
  Vector state = initial.values;
  for (int n = 0; n < n_steps; ++n) {
    const double t = t0 + dt * double(n + 1);
    out.push_back(stepper.step(state, t, data.load(t), data.dirichlet(t)));
    state = out.back().field.values;
  }
  return out;
}

}  // namespace nnfem
