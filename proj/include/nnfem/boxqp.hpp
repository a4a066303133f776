#pragma once

/**
 * @file boxqp.hpp
 * @brief Bound-constrained convex quadratic programming.
 *
 * Solves
 *
 *     minimize   1/2 <c, H c> - <c, g>
 *     subject to lower <= c <= upper
 *
 * for sparse symmetric positive-definite H. Absent bounds are encoded as
 * -infinity / +infinity; they are tested with std::isfinite and can never
 * become active.
 *
 * The solver works on an explicit working set (each variable is free, at
 * its lower bound or at its upper bound). Every candidate point is the
 * exact minimizer over the free variables with the others fixed, computed
 * with a sparse LDL^T factorization of the free block, so complementarity
 * holds exactly and multipliers are read off the gradient.
 *
 *  1. Block pivoting (primal-dual active set): all violated bounds enter and
 *     all negative multipliers leave at once. Usually converges in a handful
 *     of factorizations and is warm-startable across time steps.
 *  2. If the working set repeats (block pivoting can cycle when H is not an
 *     M-matrix), a feasible primal active-set method takes over from the
 *     projected iterate. It adds one blocking bound or drops the most
 *     negative multiplier per iteration and terminates finitely.
 *
 * Ties are broken towards the lowest index.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace nnfem {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

inline constexpr double machine_epsilon = std::numeric_limits<double>::epsilon();
inline constexpr double default_qp_tolerance = 100.0 * machine_epsilon;
inline constexpr double unbounded = std::numeric_limits<double>::infinity();

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct BoxQp {
  SparseMatrix hessian;  // H, full symmetric storage
  Vector linear;         // g
  Vector lower;          // -inf where unbounded
  Vector upper;          // +inf where unbounded
};

/// Absolute KKT residuals; @c scale is max(1, ||g||_inf).
struct KktResiduals {
  double stationarity = 0.0;        // ||H c - g - lambda_min + lambda_max||_inf
  double primal_feasibility = 0.0;  // largest bound violation
  double dual_feasibility = 0.0;    // largest negative multiplier magnitude
  double complementarity = 0.0;     // max(|(c-l).lambda_min|, |(u-c).lambda_max|)
  double scale = 1.0;

  double worst_relative() const {
    return std::max({stationarity, primal_feasibility, dual_feasibility, complementarity}) / scale;
  }
};

struct QpSolution {
  Vector c;
  Vector lambda_min;
  Vector lambda_max;
  int iterations = 0;      // working-set changes
  int factorizations = 0;
  bool used_fallback = false;
  KktResiduals kkt;

  std::size_t active_lower() const { return static_cast<std::size_t>((lambda_min.array() > 0).count()); }
  std::size_t active_upper() const { return static_cast<std::size_t>((lambda_max.array() > 0).count()); }
};

class QpIterationLimit : public SolverError {
 public:
  QpIterationLimit(const std::string& what, QpSolution best) : SolverError(what), best_(std::move(best)) {}
  const QpSolution& best() const { return best_; }

 private:
  QpSolution best_;
};

struct QpOptions {
  double tol = default_qp_tolerance;
  int max_block_iterations = 100;
  int max_iterations = 0;  // 0: 10 * n + 100
};

/// Sparse LDL^T of an SPD matrix with two steps of iterative refinement.
class SpdSolver {
 public:
  SpdSolver() = default;
  explicit SpdSolver(const SparseMatrix& a) { factorize(a); }

  void factorize(const SparseMatrix& a) {
    a_ = a;
    if (a.rows() != a.cols()) throw FactorizationError("matrix is not square");
    if (a.rows() == 0) {
      ok_ = true;
      return;
    }
    ldlt_.compute(a_);
    if (ldlt_.info() != Eigen::Success) throw FactorizationError("sparse LDL^T factorization failed");
    if (!(ldlt_.vectorD().minCoeff() > 0.0)) throw FactorizationError("matrix is not positive definite");
    ok_ = true;
  }

  Vector solve(const Vector& b) const {
    if (a_.rows() == 0) return Vector(0);
    Vector x = ldlt_.solve(b);
    for (int k = 0; k < 2; ++k) {
      const Vector r = b - a_ * x;
      x += ldlt_.solve(r);
    }
    return x;
  }

  const SparseMatrix& matrix() const { return a_; }

 private:
  SparseMatrix a_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  bool ok_ = false;
};

/// c = H^{-1} g; throws if H is not positive definite or the residual is poor.
inline Vector solve_unconstrained(const SparseMatrix& h, const Vector& g) {
  SpdSolver s(h);
  Vector c = s.solve(g);
  const double scale = std::max(1.0, g.size() ? g.cwiseAbs().maxCoeff() : 0.0);
  const double res = g.size() ? (h * c - g).cwiseAbs().maxCoeff() : 0.0;
  if (!(res <= 1e-10 * scale)) throw SolverError("unconstrained solve residual " + std::to_string(res) + " too large");
  return c;
}

inline Vector solve_unconstrained(const SpdSolver& s, const Vector& g) { return s.solve(g); }

/// KKT residuals of (c, lambda_min, lambda_max) for the box QP (h, g, lower, upper).
inline KktResiduals kkt_residuals(const SparseMatrix& h, const Vector& g, const Vector& lower, const Vector& upper,
                                  const Vector& c, const Vector& lmin, const Vector& lmax) {
  KktResiduals k;
  k.scale = std::max(1.0, g.size() ? g.cwiseAbs().maxCoeff() : 0.0);
  if (c.size() == 0) return k;
  const Vector r = h * c - g - lmin + lmax;
  k.stationarity = r.cwiseAbs().maxCoeff();
  double cl = 0.0, cu = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    if (std::isfinite(lower(i))) {
      k.primal_feasibility = std::max(k.primal_feasibility, lower(i) - c(i));
      cl += std::abs((c(i) - lower(i)) * lmin(i));
    } else if (lmin(i) != 0.0) {
      k.dual_feasibility = std::max(k.dual_feasibility, std::abs(lmin(i)));
    }
    if (std::isfinite(upper(i))) {
      k.primal_feasibility = std::max(k.primal_feasibility, c(i) - upper(i));
      cu += std::abs((upper(i) - c(i)) * lmax(i));
    } else if (lmax(i) != 0.0) {
      k.dual_feasibility = std::max(k.dual_feasibility, std::abs(lmax(i)));
    }
    k.dual_feasibility = std::max({k.dual_feasibility, -lmin(i), -lmax(i)});
  }
  k.complementarity = std::max(cl, cu);
  return k;
}

inline KktResiduals kkt_residuals(const BoxQp& qp, const Vector& c, const Vector& lmin, const Vector& lmax) {
  return kkt_residuals(qp.hessian, qp.linear, qp.lower, qp.upper, c, lmin, lmax);
}

/**
 * Reusable solver for a fixed Hessian. Keeps the factorization of the most
 * recent free block so that repeated solves with an unchanged working set
 * (typical between time levels) skip refactorization.
 */
class BoxQpSolver {
 public:
  enum class Status : std::uint8_t { free, lower, upper };

  explicit BoxQpSolver(SparseMatrix hessian, QpOptions options = {})
      : h_(std::move(hessian)), opt_(options) {
    if (h_.rows() != h_.cols()) throw SolverError("Hessian is not square");
  }

  const SparseMatrix& hessian() const { return h_; }
  const QpOptions& options() const { return opt_; }

  QpSolution solve(const Vector& g, const Vector& lower, const Vector& upper,
                   const std::optional<Vector>& warm_start = std::nullopt) {
    const auto n = static_cast<int>(h_.rows());
    if (g.size() != n || lower.size() != n || upper.size() != n) throw SolverError("box QP dimension mismatch");
    for (int i = 0; i < n; ++i) {
      if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i))
        throw SolverError("box QP bounds are inconsistent at index " + std::to_string(i));
    }
    const double scale = std::max(1.0, n ? g.cwiseAbs().maxCoeff() : 0.0);
    const double thr = opt_.tol * scale;
    const int max_iter = opt_.max_iterations > 0 ? opt_.max_iterations : 10 * n + 100;
    factorizations_ = 0;

    std::vector<Status> st(static_cast<std::size_t>(n), Status::free);
    Vector x = Vector::Zero(n);
    if (warm_start) {
      if (warm_start->size() != n) throw SolverError("warm start has wrong dimension");
      x = warm_start->cwiseMax(lower).cwiseMin(upper);
      for (int i = 0; i < n; ++i) {
        if (std::isfinite(lower(i)) && x(i) <= lower(i)) st[i] = Status::lower;
        else if (std::isfinite(upper(i)) && x(i) >= upper(i)) st[i] = Status::upper;
      }
    }
    fix_to_bounds(st, lower, upper, x);

    int iterations = 0;
    bool converged = false;
    bool fallback = false;
    Vector y = x;

    // Block pivoting.
    std::set<std::vector<Status>> seen;
    for (int k = 0; k < opt_.max_block_iterations; ++k) {
      seen.insert(st);
      y = subproblem(st, g, x);
      const Vector r = h_ * y - g;
      std::vector<Status> next(st);
      for (int i = 0; i < n; ++i) {
        switch (st[i]) {
          case Status::free:
            if (std::isfinite(lower(i)) && y(i) < lower(i)) next[i] = Status::lower;
            else if (std::isfinite(upper(i)) && y(i) > upper(i)) next[i] = Status::upper;
            break;
          case Status::lower:
            if (r(i) < -thr) next[i] = Status::free;
            break;
          case Status::upper:
            if (-r(i) < -thr) next[i] = Status::free;
            break;
        }
      }
      if (next == st) {
        converged = true;
        x = y;
        break;
      }
      ++iterations;
      if (seen.count(next)) break;
      st = std::move(next);
      x = y.cwiseMax(lower).cwiseMin(upper);
      fix_to_bounds(st, lower, upper, x);
    }

    if (!converged) {
      // Feasible primal active set from the projected iterate.
      fallback = true;
      x = y.cwiseMax(lower).cwiseMin(upper);
      for (int i = 0; i < n; ++i) {
        if (std::isfinite(lower(i)) && x(i) <= lower(i)) st[i] = Status::lower;
        else if (std::isfinite(upper(i)) && x(i) >= upper(i)) st[i] = Status::upper;
        else st[i] = Status::free;
      }
      fix_to_bounds(st, lower, upper, x);
      bool at_minimizer = false;
      while (iterations < max_iter) {
        if (!at_minimizer) {
          const Vector z = subproblem(st, g, x);
          double alpha = 1.0;
          int block = -1;
          bool block_lower = false;
          for (int i = 0; i < n; ++i) {
            if (st[i] != Status::free) continue;
            const double p = z(i) - x(i);
            double a = unbounded;
            if (p < 0.0 && std::isfinite(lower(i))) a = (lower(i) - x(i)) / p;
            else if (p > 0.0 && std::isfinite(upper(i))) a = (upper(i) - x(i)) / p;
            if (a < alpha) {
              alpha = std::max(a, 0.0);
              block = i;
              block_lower = p < 0.0;
            }
          }
          for (int i = 0; i < n; ++i) {
            if (st[i] == Status::free) x(i) = std::clamp(x(i) + alpha * (z(i) - x(i)), lower(i), upper(i));
          }
          ++iterations;
          if (block >= 0) {
            st[block] = block_lower ? Status::lower : Status::upper;
            fix_to_bounds(st, lower, upper, x);
            continue;
          }
          at_minimizer = true;
        }
        const Vector r = h_ * x - g;
        int drop = -1;
        double worst = -thr;
        for (int i = 0; i < n; ++i) {
          const double lam = st[i] == Status::lower ? r(i) : st[i] == Status::upper ? -r(i) : 0.0;
          if (lam < worst) {
            worst = lam;
            drop = i;
          }
        }
        if (drop < 0) {
          converged = true;
          break;
        }
        st[drop] = Status::free;
        at_minimizer = false;
        ++iterations;
      }
    }

    QpSolution sol = finish(g, lower, upper, st, x);
    sol.iterations = iterations;
    sol.factorizations = factorizations_;
    sol.used_fallback = fallback;
    if (!converged) throw QpIterationLimit("box QP iteration limit reached", sol);
    return sol;
  }

 private:
  static void fix_to_bounds(const std::vector<Status>& st, const Vector& lower, const Vector& upper, Vector& x) {
    for (std::size_t i = 0; i < st.size(); ++i) {
      if (st[i] == Status::lower) x(static_cast<int>(i)) = lower(static_cast<int>(i));
      else if (st[i] == Status::upper) x(static_cast<int>(i)) = upper(static_cast<int>(i));
    }
  }

  /// Minimizer over free variables with the others held at x.
  Vector subproblem(const std::vector<Status>& st, const Vector& g, const Vector& x) {
    const auto n = static_cast<int>(h_.rows());
    std::vector<int> free_idx;
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
      if (st[i] == Status::free) {
        pos[i] = static_cast<int>(free_idx.size());
        free_idx.push_back(i);
      }
    }
    Vector out = x;
    const int nf = static_cast<int>(free_idx.size());
    if (nf == 0) return out;

    Vector xfixed = x;
    for (int i : free_idx) xfixed(i) = 0.0;
    const Vector hx = h_ * xfixed;
    Vector rhs(nf);
    for (int k = 0; k < nf; ++k) rhs(k) = g(free_idx[k]) - hx(free_idx[k]);

    if (free_idx != cached_free_) {
      std::vector<Eigen::Triplet<double>> t;
      for (int col = 0; col < n; ++col) {
        if (pos[col] < 0) continue;
        for (SparseMatrix::InnerIterator it(h_, col); it; ++it) {
          if (pos[it.row()] >= 0) t.emplace_back(pos[it.row()], pos[col], it.value());
        }
      }
      SparseMatrix hff(nf, nf);
      hff.setFromTriplets(t.begin(), t.end());
      cache_.factorize(hff);
      cached_free_ = free_idx;
      ++factorizations_;
    }
    const Vector z = cache_.solve(rhs);
    for (int k = 0; k < nf; ++k) out(free_idx[k]) = z(k);
    return out;
  }

  QpSolution finish(const Vector& g, const Vector& lower, const Vector& upper, const std::vector<Status>& st,
                    const Vector& x) const {
    const auto n = static_cast<int>(h_.rows());
    QpSolution sol;
    sol.c = x;
    sol.lambda_min = Vector::Zero(n);
    sol.lambda_max = Vector::Zero(n);
    const Vector r = h_ * x - g;
    for (int i = 0; i < n; ++i) {
      if (st[i] == Status::lower) sol.lambda_min(i) = std::max(r(i), 0.0);
      else if (st[i] == Status::upper) sol.lambda_max(i) = std::max(-r(i), 0.0);
    }
    sol.kkt = kkt_residuals(h_, g, lower, upper, sol.c, sol.lambda_min, sol.lambda_max);
    return sol;
  }

  SparseMatrix h_;
  QpOptions opt_;
  SpdSolver cache_;
  std::vector<int> cached_free_;
  int factorizations_ = 0;
};

/// One-shot box QP solve.
inline QpSolution solve(const BoxQp& problem, const std::optional<Vector>& warm_start = std::nullopt,
                        double tol = default_qp_tolerance) {
  QpOptions opt;
  opt.tol = tol;
  BoxQpSolver s(problem.hessian, opt);
  return s.solve(problem.linear, problem.lower, problem.upper, warm_start);
}

}  // namespace nnfem
