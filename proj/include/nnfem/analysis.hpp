#pragma once

/**
 * @file analysis.hpp
 * @brief Error norms, cross-sectional integrals, bound-violation statistics
 *        and convergence-rate fits.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iterator>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nnfem/assembly.hpp"
#include "nnfem/element.hpp"
#include "nnfem/mesh.hpp"
#include "nnfem/solvers.hpp"

namespace nnfem {

using GradientField = std::function<Eigen::Vector2d(const Point2&)>;

/// Quadrature order used for error integrals: one above assembly.
/// 3x3 Gauss on quad4, the 6-point rule on tri3.
inline int error_quadrature_order(ElementKind) { return default_quadrature_order + 1; }

namespace detail {

inline void check_field(const Mesh& mesh, const Vector& v) {
  if (v.size() != static_cast<Eigen::Index>(mesh.num_nodes()))
    throw std::invalid_argument("field size does not match the mesh");
}

inline Vector element_values(const Mesh& mesh, const Vector& v, std::size_t e) {
  const auto nodes = mesh.element(e);
  Vector out(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t a = 0; a < nodes.size(); ++a) out(static_cast<Eigen::Index>(a)) = v(static_cast<Eigen::Index>(nodes[a]));
  return out;
}

}  // namespace detail

/// ||c_h - c||_{L2} with c_h the finite-element interpolant of the nodal values.
inline double l2_error(const Vector& values, const ScalarField& exact, const Mesh& mesh) {
  detail::check_field(mesh, values);
  const int order = error_quadrature_order(mesh.kind());
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Vector ue = detail::element_values(mesh, values, e);
    for (const auto& ev : shape_evals(mesh.kind(), mesh.element_coords(e), order)) {
      const double diff = ev.n.dot(ue) - exact(ev.x);
      sum += diff * diff * ev.weight;
    }
  }
  return std::sqrt(sum);
}

inline double l2_error(const NodalField& field, const ScalarField& exact, const Mesh& mesh) {
  return l2_error(field.values, exact, mesh);
}

/// |c_h - c|_{H1}.
inline double h1_seminorm_error(const Vector& values, const GradientField& exact_gradient, const Mesh& mesh) {
  detail::check_field(mesh, values);
  const int order = error_quadrature_order(mesh.kind());
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Vector ue = detail::element_values(mesh, values, e);
    for (const auto& ev : shape_evals(mesh.kind(), mesh.element_coords(e), order)) {
      const Eigen::Vector2d diff = ev.grad.transpose() * ue - exact_gradient(ev.x);
      sum += diff.squaredNorm() * ev.weight;
    }
  }
  return std::sqrt(sum);
}

inline double h1_seminorm_error(const NodalField& field, const GradientField& exact_gradient, const Mesh& mesh) {
  return h1_seminorm_error(field.values, exact_gradient, mesh);
}

struct CurvePoint {
  double x = 0.0;
  double value = 0.0;
};

/**
 * Integral of the field over y along vertical mesh lines of a structured
 * mesh (nodal trapezoid), linearly interpolated between lines for each
 * requested x. An empty sample list returns one point per mesh column.
 */
inline std::vector<CurvePoint> integrated_concentration_over_y(const Vector& values, const Mesh& mesh,
                                                               const std::vector<double>& x_samples = {}) {
  detail::check_field(mesh, values);
  const auto& info = mesh.structured();
  if (!info) throw std::invalid_argument("cross-sectional integrals need a structured mesh");
  std::vector<CurvePoint> columns(info->nx);
  for (std::size_t i = 0; i < info->nx; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < info->ny; ++j) {
      const auto n0 = info->node(i, j), n1 = info->node(i, j + 1);
      const double dy = mesh.node(n1).y - mesh.node(n0).y;
      s += 0.5 * dy * (values(static_cast<Eigen::Index>(n0)) + values(static_cast<Eigen::Index>(n1)));
    }
    columns[i] = {mesh.node(info->node(i, 0)).x, s};
  }
  if (x_samples.empty()) return columns;

  std::vector<CurvePoint> out;
  out.reserve(x_samples.size());
  for (double x : x_samples) {
    if (x < columns.front().x || x > columns.back().x) throw std::invalid_argument("x sample outside the mesh");
    auto hi = std::lower_bound(columns.begin(), columns.end(), x,
                               [](const CurvePoint& p, double v) { return p.x < v; });
    if (hi == columns.begin()) {
      out.push_back({x, hi->value});
      continue;
    }
    const auto lo = std::prev(hi);
    const double w = (x - lo->x) / (hi->x - lo->x);
    out.push_back({x, (1.0 - w) * lo->value + w * hi->value});
  }
  return out;
}

struct ViolationStats {
  double min = 0.0;
  double max = 0.0;
  double ratio_percent = 0.0;     // 100 min / max
  double violated_percent = 0.0;  // nodes strictly below the lower bound
  std::size_t violated_nodes = 0;
};

inline ViolationStats violation_stats(const Vector& values, const Bounds& bounds = Bounds::nonnegative()) {
  ViolationStats s;
  if (values.size() == 0) return s;
  s.min = values.minCoeff();
  s.max = values.maxCoeff();
  s.ratio_percent = s.max != 0.0 ? 100.0 * s.min / s.max : 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < bounds.min) ++s.violated_nodes;
  }
  s.violated_percent = 100.0 * double(s.violated_nodes) / double(values.size());
  return s;
}

inline ViolationStats violation_stats(const NodalField& field, const Bounds& bounds = Bounds::nonnegative()) {
  return violation_stats(field.values, bounds);
}

struct ErrorSample {
  double h = 0.0;
  double error = 0.0;
};

struct ConvergenceFit {
  double slope = 0.0;           // least-squares slope of log e against log h
  std::vector<double> pairwise;  // between consecutive samples
};

inline ConvergenceFit convergence_rates(const std::vector<ErrorSample>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("convergence fit needs at least two samples");
  ConvergenceFit fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    if (!(s.h > 0.0) || !(s.error > 0.0)) throw std::invalid_argument("convergence fit needs positive h and error");
    const double x = std::log(s.h), y = std::log(s.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(samples.size());
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    fit.pairwise.push_back(std::log(samples[k].error / samples[k - 1].error) /
                           std::log(samples[k].h / samples[k - 1].h));
  }
  return fit;
}

}  // namespace nnfem
