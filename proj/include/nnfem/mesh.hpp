#pragma once

/**
 * @file mesh.hpp
 * @brief Structured 2D meshes of three-node triangles and four-node
 *        quadrilaterals with tagged boundary edges.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nnfem {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class ElementKind { tri3, quad4 };

enum class BcRole { dirichlet, neumann };

inline std::string to_string(ElementKind kind) {
  return kind == ElementKind::tri3 ? "tri3" : "quad4";
}

inline ElementKind parse_element_kind(const std::string& s) {
  if (s == "tri3") return ElementKind::tri3;
  if (s == "quad4") return ElementKind::quad4;
  throw std::invalid_argument("unknown element kind '" + s + "'");
}

inline std::size_t nodes_per_element(ElementKind kind) {
  return kind == ElementKind::tri3 ? 3 : 4;
}

struct BoundaryEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::string marker;
};

/// Lattice description retained for structured meshes so that column-wise
/// post-processing (cross-section integrals) can address nodes directly.
struct StructuredInfo {
  Point2 origin;
  double lx = 0.0;
  double ly = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;

  std::size_t node(std::size_t i, std::size_t j) const { return j * nx + i; }
};

class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Low-order 2D mesh. Elements are stored as flat node-index lists of
 * length 3 (tri3) or 4 (quad4), counterclockwise. Boundary edges carry a
 * marker string; markers map to a boundary-condition role.
 *
 * Immutable after construction apart from marker edits made by problem
 * constructors before the mesh is shared.
 */
class Mesh {
 public:
  Mesh() = default;
  Mesh(ElementKind kind, std::vector<Point2> nodes, std::vector<std::size_t> connectivity,
       std::vector<BoundaryEdge> boundary, std::map<std::string, BcRole> markers)
      : kind_(kind),
        nodes_(std::move(nodes)),
        conn_(std::move(connectivity)),
        boundary_(std::move(boundary)),
        markers_(std::move(markers)) {}

  ElementKind kind() const { return kind_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t nodes_per_elem() const { return nodes_per_element(kind_); }
  std::size_t num_elements() const { return conn_.size() / nodes_per_elem(); }

  const Point2& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Point2>& nodes() const { return nodes_; }

  /// Node indices of element @p e.
  std::vector<std::size_t> element(std::size_t e) const {
    const auto n = nodes_per_elem();
    return {conn_.begin() + static_cast<std::ptrdiff_t>(e * n),
            conn_.begin() + static_cast<std::ptrdiff_t>((e + 1) * n)};
  }

  std::vector<Point2> element_coords(std::size_t e) const {
    std::vector<Point2> out;
    out.reserve(nodes_per_elem());
    for (auto i : element(e)) out.push_back(nodes_[i]);
    return out;
  }

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const std::map<std::string, BcRole>& markers() const { return markers_; }

  BcRole role(const std::string& marker) const {
    auto it = markers_.find(marker);
    if (it == markers_.end()) throw MeshError("marker '" + marker + "' has no boundary-condition role");
    return it->second;
  }

  void set_role(const std::string& marker, BcRole role) {
    if (!markers_.count(marker)) throw MeshError("unknown marker '" + marker + "'");
    markers_[marker] = role;
  }

  void set_all_roles(BcRole role) {
    for (auto& [name, r] : markers_) r = role;
  }

  /// Re-tag edges of @p from whose midpoint satisfies @p pred as @p to.
  void split_marker(const std::string& from, const std::string& to, BcRole role,
                    const std::function<bool(const Point2&)>& pred) {
    if (!markers_.count(from)) throw MeshError("unknown marker '" + from + "'");
    bool any = false;
    for (auto& e : boundary_) {
      if (e.marker != from) continue;
      const Point2 mid{0.5 * (nodes_[e.a].x + nodes_[e.b].x), 0.5 * (nodes_[e.a].y + nodes_[e.b].y)};
      if (pred(mid)) {
        e.marker = to;
        any = true;
      }
    }
    if (!any) throw MeshError("split of marker '" + from + "' into '" + to + "' selected no edges");
    markers_[to] = role;
    const bool from_used =
        std::any_of(boundary_.begin(), boundary_.end(), [&](const BoundaryEdge& e) { return e.marker == from; });
    if (!from_used) markers_.erase(from);
  }

  const std::optional<StructuredInfo>& structured() const { return structured_; }
  void set_structured(StructuredInfo info) { structured_ = info; }

  double element_area(std::size_t e) const { return polygon_area(element_coords(e)); }

  double total_area() const {
    double a = 0.0;
    for (std::size_t e = 0; e < num_elements(); ++e) a += element_area(e);
    return a;
  }

  /// Nodes touched by an edge whose marker has the Dirichlet role, each
  /// paired with the first such marker encountered in edge order.
  std::vector<std::pair<std::size_t, std::string>> dirichlet_nodes() const {
    std::vector<int> seen(nodes_.size(), 0);
    std::vector<std::pair<std::size_t, std::string>> out;
    for (const auto& e : boundary_) {
      if (role(e.marker) != BcRole::dirichlet) continue;
      for (auto n : {e.a, e.b}) {
        if (!seen[n]) {
          seen[n] = 1;
          out.emplace_back(n, e.marker);
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    return out;
  }

  /// Shoelace area; positive for counterclockwise ordering.
  static double polygon_area(const std::vector<Point2>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& a = p[i];
      const auto& b = p[(i + 1) % p.size()];
      s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
  }

  /// Throws MeshError if any structural invariant is broken.
  void validate() const {
    const auto n = nodes_per_elem();
    if (conn_.size() % n != 0) throw MeshError("connectivity length is not a multiple of element size");
    for (std::size_t e = 0; e < num_elements(); ++e) {
      for (auto i : element(e)) {
        if (i >= nodes_.size()) throw MeshError("element " + std::to_string(e) + " references missing node");
      }
      if (!(element_area(e) > 0.0)) throw MeshError("element " + std::to_string(e) + " has non-positive area");
    }

    // Each boundary edge must be an element edge used exactly once.
    std::map<std::pair<std::size_t, std::size_t>, int> edge_use;
    for (std::size_t e = 0; e < num_elements(); ++e) {
      auto el = element(e);
      for (std::size_t k = 0; k < n; ++k) {
        auto a = el[k], b = el[(k + 1) % n];
        edge_use[{std::min(a, b), std::max(a, b)}] += 1;
      }
    }
    std::map<std::pair<std::size_t, std::size_t>, int> tagged;
    for (const auto& be : boundary_) {
      auto key = std::make_pair(std::min(be.a, be.b), std::max(be.a, be.b));
      auto it = edge_use.find(key);
      if (it == edge_use.end() || it->second != 1) throw MeshError("boundary edge is not on the domain boundary");
      if (++tagged[key] > 1) throw MeshError("boundary edge tagged more than once");
      role(be.marker);
    }
    for (const auto& [key, count] : edge_use) {
      if (count == 1 && !tagged.count(key)) throw MeshError("domain boundary edge without a marker");
    }
  }

  bool has_dirichlet() const {
    return std::any_of(boundary_.begin(), boundary_.end(),
                       [&](const BoundaryEdge& e) { return role(e.marker) == BcRole::dirichlet; });
  }

 private:
  ElementKind kind_ = ElementKind::quad4;
  std::vector<Point2> nodes_;
  std::vector<std::size_t> conn_;
  std::vector<BoundaryEdge> boundary_;
  std::map<std::string, BcRole> markers_;
  std::optional<StructuredInfo> structured_;
};

/**
 * Uniform lattice on [x0, x0+lx] x [y0, y0+ly] with nx*ny nodes numbered
 * row-major from the origin. Triangles split each cell along the diagonal
 * from its lower-left to upper-right corner. Boundary markers are "left",
 * "right", "bottom" and "top", all initially Dirichlet.
 */
inline Mesh generate_structured(Point2 origin, std::pair<double, double> lengths,
                                std::pair<std::size_t, std::size_t> seeds, ElementKind kind) {
  const auto [lx, ly] = lengths;
  const auto [nx, ny] = seeds;
  if (nx < 2 || ny < 2) throw MeshError("structured mesh needs at least 2 nodes per direction");
  if (!(lx > 0.0) || !(ly > 0.0)) throw MeshError("structured mesh lengths must be positive");

  std::vector<Point2> nodes;
  nodes.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      // Pin the last row/column so the far sides are exact.
      const double x = (i + 1 == nx) ? origin.x + lx : origin.x + lx * double(i) / double(nx - 1);
      const double y = (j + 1 == ny) ? origin.y + ly : origin.y + ly * double(j) / double(ny - 1);
      nodes.push_back({x, y});
    }
  }
  auto id = [nx = nx](std::size_t i, std::size_t j) { return j * nx + i; };

  std::vector<std::size_t> conn;
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const auto n0 = id(i, j), n1 = id(i + 1, j), n2 = id(i + 1, j + 1), n3 = id(i, j + 1);
      if (kind == ElementKind::quad4) {
        conn.insert(conn.end(), {n0, n1, n2, n3});
      } else {
        conn.insert(conn.end(), {n0, n1, n2});
        conn.insert(conn.end(), {n0, n2, n3});
      }
    }
  }

  std::vector<BoundaryEdge> boundary;
  for (std::size_t i = 0; i + 1 < nx; ++i) boundary.push_back({id(i, 0), id(i + 1, 0), "bottom"});
  for (std::size_t j = 0; j + 1 < ny; ++j) boundary.push_back({id(nx - 1, j), id(nx - 1, j + 1), "right"});
  for (std::size_t i = nx - 1; i > 0; --i) boundary.push_back({id(i, ny - 1), id(i - 1, ny - 1), "top"});
  for (std::size_t j = ny - 1; j > 0; --j) boundary.push_back({id(0, j), id(0, j - 1), "left"});

  std::map<std::string, BcRole> markers{{"left", BcRole::dirichlet},
                                        {"right", BcRole::dirichlet},
                                        {"bottom", BcRole::dirichlet},
                                        {"top", BcRole::dirichlet}};
  Mesh mesh(kind, std::move(nodes), std::move(conn), std::move(boundary), std::move(markers));
  mesh.set_structured({origin, lx, ly, nx, ny});
  return mesh;
}

/// Largest element edge length; the mesh size used for convergence fits.
inline double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  const auto n = mesh.nodes_per_elem();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto p = mesh.element_coords(e);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& a = p[k];
      const auto& b = p[(k + 1) % n];
      h = std::max(h, std::hypot(b.x - a.x, b.y - a.y));
    }
  }
  return h;
}

/// Index of the mesh node closest to @p p (lowest index on ties).
inline std::size_t nearest_node(const Mesh& mesh, const Point2& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const double d = std::hypot(mesh.node(i).x - p.x, mesh.node(i).y - p.y);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace nnfem
