#pragma once

/**
 * @file io.hpp
 * @brief Legacy ASCII VTK point-data files, Matrix Market dumps and CSV
 *        number formatting.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/SparseExtra>

#include "nnfem/assembly.hpp"
#include "nnfem/mesh.hpp"

namespace nnfem::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decimal text that round-trips the double exactly.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline int vtk_cell_type(ElementKind kind) { return kind == ElementKind::tri3 ? 5 : 9; }

/// Unstructured grid with a single point-data scalar.
inline void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const Vector& values,
                      const std::string& name, const std::string& title = "nnfem") {
  if (values.size() != static_cast<Eigen::Index>(mesh.num_nodes()))
    throw IoError("field '" + name + "' does not match the mesh");
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes()) out << fmt(p.x) << ' ' << fmt(p.y) << " 0\n";
  const auto nen = mesh.nodes_per_elem();
  out << "CELLS " << mesh.num_elements() << ' ' << mesh.num_elements() * (nen + 1) << '\n';
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    out << nen;
    for (auto n : mesh.element(e)) out << ' ' << n;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.num_elements() << '\n';
  const int type = vtk_cell_type(mesh.kind());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) out << type << '\n';
  out << "POINT_DATA " << mesh.num_nodes() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) out << fmt(values(i)) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!Eigen::saveMarket(m, path.string())) throw IoError("cannot write '" + path.string() + "'");
}

inline void write_matrix_market(const std::filesystem::path& path, const Vector& v) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!Eigen::saveMarketVector(v, path.string())) throw IoError("cannot write '" + path.string() + "'");
}

inline SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  SparseMatrix m;
  if (!Eigen::loadMarket(m, path.string())) throw IoError("cannot read '" + path.string() + "'");
  return m;
}

inline Vector read_matrix_market_vector(const std::filesystem::path& path) {
  Vector v;
  if (!Eigen::loadMarketVector(v, path.string())) throw IoError("cannot read '" + path.string() + "'");
  return v;
}

/// Comma-joined row, no quoting (fields never contain commas).
inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) s += ',';
    s += fields[k];
  }
  return s;
}

}  // namespace nnfem::io
