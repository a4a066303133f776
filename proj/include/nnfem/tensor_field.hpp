#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "nnfem/mesh.hpp"

namespace nnfem {

using Tensor2 = Eigen::Matrix2d;

/// Position-dependent symmetric positive-definite 2x2 diffusivity.
using TensorField = std::function<Tensor2(const Point2&)>;

class TensorFieldError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline Tensor2 rotation(double theta) {
  Tensor2 r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

inline TensorField constant_tensor(const Tensor2& d) {
  return [d](const Point2&) { return d; };
}

/// R(theta) * diag(d1, d2) * R(theta)^T.
inline TensorField rotated_orthotropic(double theta, double d1, double d2) {
  const Tensor2 r = rotation(theta);
  Tensor2 diag = Tensor2::Zero();
  diag(0, 0) = d1;
  diag(1, 1) = d2;
  const Tensor2 d = r * diag * r.transpose();
  return constant_tensor(0.5 * (d + d.transpose()));
}

/// R(theta) * base(x) * R(theta)^T, symmetrised.
inline TensorField rotate(TensorField base, double theta) {
  const Tensor2 r = rotation(theta);
  return [base = std::move(base), r](const Point2& p) {
    Tensor2 d = r * base(p) * r.transpose();
    return Tensor2(0.5 * (d + d.transpose()));
  };
}

/// Throws unless @p d is symmetric to 1e-14 and both eigenvalues are positive.
inline void check_spd(const Tensor2& d, const Point2& where) {
  if (std::abs(d(0, 1) - d(1, 0)) > 1e-14 * std::max(1.0, d.cwiseAbs().maxCoeff())) {
    throw TensorFieldError("diffusivity is not symmetric at (" + std::to_string(where.x) + ", " +
                           std::to_string(where.y) + ")");
  }
  // Sylvester's criterion for 2x2.
  const double det = d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0);
  if (!(d(0, 0) > 0.0) || !(det > 0.0)) {
    throw TensorFieldError("diffusivity is not positive-definite at (" + std::to_string(where.x) + ", " +
                           std::to_string(where.y) + ")");
  }
}

}  // namespace nnfem
