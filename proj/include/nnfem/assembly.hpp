#pragma once

/**
 * @file assembly.hpp
 * @brief Global stiffness and capacity matrices, load vectors and the
 *        Dirichlet partition used by every solver.
 *
 * Dirichlet nodes are eliminated symmetrically: they are fixed, excluded
 * from the unknown set, and their contribution moves to the right-hand
 * side. The free block of the operator stays symmetric positive-definite.
 */

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nnfem/element.hpp"
#include "nnfem/mesh.hpp"
#include "nnfem/quadrature.hpp"
#include "nnfem/tensor_field.hpp"

namespace nnfem {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Point2&)>;

class AssemblyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Concentrated source applied at the mesh node nearest to @c location.
struct PointLoad {
  Point2 location;
  double value = 0.0;
};

struct LoadData {
  ScalarField source;                          // volumetric; empty means zero
  std::vector<PointLoad> point_loads;
  std::map<std::string, ScalarField> neumann;  // prescribed flux per Neumann marker
};

using DirichletData = std::map<std::string, ScalarField>;

struct AssembledSystem {
  SparseMatrix stiffness;                    // K, before elimination
  SparseMatrix capacity;                     // consistent M
  std::vector<std::size_t> dirichlet_nodes;  // sorted
  std::vector<std::string> dirichlet_markers;
  Vector dirichlet_values;                   // parallel to dirichlet_nodes
  std::vector<std::size_t> free_dofs;        // sorted
  std::vector<std::ptrdiff_t> free_index;    // node -> position in free_dofs, or -1

  std::size_t num_dofs() const { return free_index.size(); }
  std::size_t num_free() const { return free_dofs.size(); }

  /// Full nodal vector from free values and the stored Dirichlet values.
  Vector expand(const Vector& free_values) const {
    Vector full(num_dofs());
    for (std::size_t k = 0; k < free_dofs.size(); ++k) full(free_dofs[k]) = free_values(k);
    for (std::size_t k = 0; k < dirichlet_nodes.size(); ++k) full(dirichlet_nodes[k]) = dirichlet_values(k);
    return full;
  }

  Vector restrict_free(const Vector& full) const {
    Vector out(free_dofs.size());
    for (std::size_t k = 0; k < free_dofs.size(); ++k) out(k) = full(free_dofs[k]);
    return out;
  }
};

/// Free/free and free/Dirichlet blocks of a global operator.
struct Partition {
  SparseMatrix ff;
  SparseMatrix fd;
};

inline Partition partition(const SparseMatrix& h, const AssembledSystem& sys) {
  std::vector<std::ptrdiff_t> dir_index(sys.num_dofs(), -1);
  for (std::size_t k = 0; k < sys.dirichlet_nodes.size(); ++k)
    dir_index[sys.dirichlet_nodes[k]] = static_cast<std::ptrdiff_t>(k);
  std::vector<Eigen::Triplet<double>> tff, tfd;
  for (int col = 0; col < h.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(h, col); it; ++it) {
      const auto fr = sys.free_index[it.row()];
      if (fr < 0) continue;
      const auto fc = sys.free_index[col];
      if (fc >= 0) {
        tff.emplace_back(static_cast<int>(fr), static_cast<int>(fc), it.value());
      } else {
        tfd.emplace_back(static_cast<int>(fr), static_cast<int>(dir_index[col]), it.value());
      }
    }
  }
  Partition p;
  p.ff.resize(static_cast<int>(sys.num_free()), static_cast<int>(sys.num_free()));
  p.fd.resize(static_cast<int>(sys.num_free()), static_cast<int>(sys.dirichlet_nodes.size()));
  p.ff.setFromTriplets(tff.begin(), tff.end());
  p.fd.setFromTriplets(tfd.begin(), tfd.end());
  return p;
}

/// Right-hand side of the eliminated system: g_f - H_fd * c_d.
inline Vector eliminated_rhs(const Partition& p, const AssembledSystem& sys, const Vector& full_rhs) {
  Vector g = sys.restrict_free(full_rhs);
  if (sys.dirichlet_values.size() > 0) g.noalias() -= p.fd * sys.dirichlet_values;
  return g;
}

/**
 * Scatters element stiffness and capacity matrices into global sparse
 * matrices and records the Dirichlet node set. Element order fixes the
 * summation order, so results are bitwise reproducible.
 */
inline AssembledSystem assemble_operators(const Mesh& mesh, const TensorField& diffusivity,
                                          int order = default_quadrature_order, bool lumped_capacity = false) {
  const auto n = static_cast<int>(mesh.num_nodes());
  std::vector<Eigen::Triplet<double>> tk, tm;
  const auto nen = mesh.nodes_per_elem();
  tk.reserve(mesh.num_elements() * nen * nen);
  tm.reserve(mesh.num_elements() * nen * nen);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element(e);
    const auto coords = mesh.element_coords(e);
    const Eigen::MatrixXd ke = element_stiffness(mesh.kind(), coords, diffusivity, order);
    const Eigen::MatrixXd me = lumped_capacity ? element_capacity_lumped(mesh.kind(), coords, order)
                                               : element_capacity(mesh.kind(), coords, order);
    for (std::size_t a = 0; a < nen; ++a) {
      for (std::size_t b = 0; b < nen; ++b) {
        tk.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]), ke(a, b));
        if (me(a, b) != 0.0) tm.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]), me(a, b));
      }
    }
  }
  AssembledSystem sys;
  sys.stiffness.resize(n, n);
  sys.capacity.resize(n, n);
  sys.stiffness.setFromTriplets(tk.begin(), tk.end());
  sys.capacity.setFromTriplets(tm.begin(), tm.end());

  sys.free_index.assign(mesh.num_nodes(), -1);
  std::vector<char> is_dirichlet(mesh.num_nodes(), 0);
  for (const auto& [node, marker] : mesh.dirichlet_nodes()) {
    is_dirichlet[node] = 1;
    sys.dirichlet_nodes.push_back(node);
    sys.dirichlet_markers.push_back(marker);
  }
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (!is_dirichlet[i]) {
      sys.free_index[i] = static_cast<std::ptrdiff_t>(sys.free_dofs.size());
      sys.free_dofs.push_back(i);
    }
  }
  sys.dirichlet_values = Vector::Zero(static_cast<int>(sys.dirichlet_nodes.size()));
  return sys;
}

/// Evaluates prescribed values at the Dirichlet nodes, one marker per node.
inline Vector dirichlet_values(const Mesh& mesh, const AssembledSystem& sys, const DirichletData& data) {
  Vector v(static_cast<int>(sys.dirichlet_nodes.size()));
  for (std::size_t k = 0; k < sys.dirichlet_nodes.size(); ++k) {
    auto it = data.find(sys.dirichlet_markers[k]);
    if (it == data.end()) throw AssemblyError("no Dirichlet data for marker '" + sys.dirichlet_markers[k] + "'");
    v(static_cast<int>(k)) = it->second ? it->second(mesh.node(sys.dirichlet_nodes[k])) : 0.0;
  }
  return v;
}

/**
 * Volumetric source, Neumann flux (2-point Gauss per edge) and point loads
 * assembled into a global vector over all nodes.
 */
inline Vector assemble_load(const Mesh& mesh, const LoadData& load, int order = default_quadrature_order) {
  Vector f = Vector::Zero(static_cast<int>(mesh.num_nodes()));
  if (load.source) {
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const auto nodes = mesh.element(e);
      for (const auto& ev : shape_evals(mesh.kind(), mesh.element_coords(e), order)) {
        const double s = load.source(ev.x) * ev.weight;
        for (std::size_t a = 0; a < nodes.size(); ++a) f(static_cast<int>(nodes[a])) += s * ev.n(static_cast<int>(a));
      }
    }
  }
  for (const auto& [marker, flux] : load.neumann) {
    if (!mesh.markers().count(marker)) throw AssemblyError("Neumann data for unknown marker '" + marker + "'");
    if (mesh.role(marker) != BcRole::neumann)
      throw AssemblyError("Neumann data given for non-Neumann marker '" + marker + "'");
  }
  const auto gauss = gauss_legendre(2);
  for (const auto& edge : mesh.boundary_edges()) {
    if (mesh.role(edge.marker) != BcRole::neumann) continue;
    auto it = load.neumann.find(edge.marker);
    if (it == load.neumann.end() || !it->second) continue;
    const auto& pa = mesh.node(edge.a);
    const auto& pb = mesh.node(edge.b);
    const double half_len = 0.5 * std::hypot(pb.x - pa.x, pb.y - pa.y);
    for (const auto& [s, w] : gauss) {
      const double na = 0.5 * (1.0 - s), nb = 0.5 * (1.0 + s);
      const Point2 x{na * pa.x + nb * pb.x, na * pa.y + nb * pb.y};
      const double q = it->second(x) * w * half_len;
      f(static_cast<int>(edge.a)) += q * na;
      f(static_cast<int>(edge.b)) += q * nb;
    }
  }
  for (const auto& pl : load.point_loads) f(static_cast<int>(nearest_node(mesh, pl.location))) += pl.value;
  return f;
}

/// One-shot assembly: operators, load vector and Dirichlet values.
inline std::pair<AssembledSystem, Vector> assemble(const Mesh& mesh, const TensorField& diffusivity,
                                                   const LoadData& load, const DirichletData& dirichlet,
                                                   int order = default_quadrature_order) {
  for (const auto& e : mesh.boundary_edges()) mesh.role(e.marker);
  AssembledSystem sys = assemble_operators(mesh, diffusivity, order);
  sys.dirichlet_values = dirichlet_values(mesh, sys, dirichlet);
  return {std::move(sys), assemble_load(mesh, load, order)};
}

}  // namespace nnfem
