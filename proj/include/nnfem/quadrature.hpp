#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nnfem {

struct QuadPoint {
  double xi = 0.0;
  double eta = 0.0;
  double weight = 0.0;
};

/// Gauss-Legendre points and weights on [-1, 1], orders 1..4.
inline std::vector<std::array<double, 2>> gauss_legendre(int n) {
  switch (n) {
    case 1:
      return {{0.0, 2.0}};
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      return {{-a, 1.0}, {a, 1.0}};
    }
    case 3: {
      const double a = std::sqrt(0.6);
      return {{-a, 5.0 / 9.0}, {0.0, 8.0 / 9.0}, {a, 5.0 / 9.0}};
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      return {{-b, wb}, {-a, wa}, {a, wa}, {b, wb}};
    }
    default:
      throw std::invalid_argument("unsupported Gauss-Legendre order");
  }
}

/// Tensor-product rule on the reference square [-1,1]^2 with n points per axis.
inline std::vector<QuadPoint> quad_rule(int n) {
  std::vector<QuadPoint> out;
  const auto g = gauss_legendre(n);
  for (const auto& [y, wy] : g) {
    for (const auto& [x, wx] : g) out.push_back({x, y, wx * wy});
  }
  return out;
}

/**
 * Symmetric rules on the reference triangle (0,0)-(1,0)-(0,1); weights sum
 * to the reference area 1/2. @p degree is the polynomial degree integrated
 * exactly: 1 (centroid), 2 (3-point), 4 (6-point).
 */
inline std::vector<QuadPoint> triangle_rule(int degree) {
  if (degree <= 1) return {{1.0 / 3.0, 1.0 / 3.0, 0.5}};
  if (degree == 2) {
    const double w = 1.0 / 6.0;
    return {{1.0 / 6.0, 1.0 / 6.0, w}, {2.0 / 3.0, 1.0 / 6.0, w}, {1.0 / 6.0, 2.0 / 3.0, w}};
  }
  if (degree <= 4) {
    const double a1 = 0.445948490915965, w1 = 0.223381589678011 / 2.0;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322 / 2.0;
    return {{a1, a1, w1},
            {1.0 - 2.0 * a1, a1, w1},
            {a1, 1.0 - 2.0 * a1, w1},
            {a2, a2, w2},
            {1.0 - 2.0 * a2, a2, w2},
            {a2, 1.0 - 2.0 * a2, w2}};
  }
  throw std::invalid_argument("unsupported triangle rule degree");
}

}  // namespace nnfem
