#pragma once

/**
 * @file element.hpp
 * @brief Shape functions and element matrices for tri3 and quad4.
 *
 * Quadrature order semantics: for quad4 it is the number of Gauss points
 * per direction; for tri3, 1 selects the centroid rule, 2 the 3-point rule
 * and 3 the 6-point rule.
 */

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nnfem/mesh.hpp"
#include "nnfem/quadrature.hpp"
#include "nnfem/tensor_field.hpp"

namespace nnfem {

inline constexpr int default_quadrature_order = 2;

class ElementInversionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape function values and physical gradients at one quadrature point.
struct ShapeEval {
  Eigen::VectorXd n;        // nen
  Eigen::MatrixXd grad;     // nen x 2
  Point2 x;                 // physical position
  double weight = 0.0;      // quadrature weight times |J|
};

inline std::vector<QuadPoint> element_rule(ElementKind kind, int order) {
  if (kind == ElementKind::quad4) return quad_rule(order);
  switch (order) {
    case 1: return triangle_rule(1);
    case 2: return triangle_rule(2);
    case 3: return triangle_rule(4);
    default: throw std::invalid_argument("unsupported tri3 quadrature order " + std::to_string(order));
  }
}

inline void reference_shape(ElementKind kind, double xi, double eta, Eigen::VectorXd& n,
                            Eigen::MatrixXd& dref) {
  if (kind == ElementKind::tri3) {
    n.resize(3);
    dref.resize(3, 2);
    n << 1.0 - xi - eta, xi, eta;
    dref << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0;
    return;
  }
  n.resize(4);
  dref.resize(4, 2);
  n << 0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta), 0.25 * (1 + xi) * (1 + eta),
      0.25 * (1 - xi) * (1 + eta);
  dref << -0.25 * (1 - eta), -0.25 * (1 - xi), 0.25 * (1 - eta), -0.25 * (1 + xi), 0.25 * (1 + eta),
      0.25 * (1 + xi), -0.25 * (1 + eta), 0.25 * (1 - xi);
}

/// Evaluates shapes at every point of the rule; throws on a non-positive Jacobian.
inline std::vector<ShapeEval> shape_evals(ElementKind kind, const std::vector<Point2>& coords, int order) {
  const auto nen = nodes_per_element(kind);
  if (coords.size() != nen) throw std::invalid_argument("element coordinate count does not match element kind");
  std::vector<ShapeEval> out;
  Eigen::VectorXd n;
  Eigen::MatrixXd dref;
  for (const auto& qp : element_rule(kind, order)) {
    reference_shape(kind, qp.xi, qp.eta, n, dref);
    Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
    Point2 x{0.0, 0.0};
    for (std::size_t a = 0; a < nen; ++a) {
      jac(0, 0) += dref(a, 0) * coords[a].x;
      jac(0, 1) += dref(a, 1) * coords[a].x;
      jac(1, 0) += dref(a, 0) * coords[a].y;
      jac(1, 1) += dref(a, 1) * coords[a].y;
      x.x += n(a) * coords[a].x;
      x.y += n(a) * coords[a].y;
    }
    const double det = jac.determinant();
    if (!(det > 0.0)) throw ElementInversionError("non-positive element Jacobian");
    ShapeEval ev;
    ev.n = n;
    ev.grad = dref * jac.inverse();
    ev.x = x;
    ev.weight = qp.weight * det;
    out.push_back(std::move(ev));
  }
  return out;
}

/// Integral of grad(N_a) . D . grad(N_b) over the element.
inline Eigen::MatrixXd element_stiffness(ElementKind kind, const std::vector<Point2>& coords,
                                         const TensorField& diffusivity, int order = default_quadrature_order,
                                         bool check_tensor = true) {
  const auto nen = nodes_per_element(kind);
  Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(nen, nen);
  for (const auto& ev : shape_evals(kind, coords, order)) {
    const Tensor2 d = diffusivity(ev.x);
    if (check_tensor) check_spd(d, ev.x);
    ke.noalias() += ev.weight * (ev.grad * d * ev.grad.transpose());
  }
  return 0.5 * (ke + ke.transpose());
}

/// Consistent capacity matrix: integral of N_a N_b.
inline Eigen::MatrixXd element_capacity(ElementKind kind, const std::vector<Point2>& coords,
                                        int order = default_quadrature_order) {
  const auto nen = nodes_per_element(kind);
  Eigen::MatrixXd me = Eigen::MatrixXd::Zero(nen, nen);
  for (const auto& ev : shape_evals(kind, coords, order)) me.noalias() += ev.weight * (ev.n * ev.n.transpose());
  return me;
}

/// Row-sum lumped capacity. Only used to contrast with the consistent matrix.
inline Eigen::MatrixXd element_capacity_lumped(ElementKind kind, const std::vector<Point2>& coords,
                                               int order = default_quadrature_order) {
  const Eigen::MatrixXd me = element_capacity(kind, coords, order);
  return Eigen::MatrixXd(me.rowwise().sum().asDiagonal());
}

}  // namespace nnfem
