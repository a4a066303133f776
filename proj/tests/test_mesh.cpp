#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "nnfem/mesh.hpp"

using namespace nnfem;

namespace {

// Brute-force shoelace over every element, independent of Mesh::total_area.
double summed_area(const Mesh& m) {
  double a = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto p = m.element_coords(e);
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const auto& u = p[k];
      const auto& v = p[(k + 1) % p.size()];
      s += u.x * v.y - v.x * u.y;
    }
    a += 0.5 * s;
  }
  return a;
}

}  // namespace

TEST(StructuredMesh, Quad4Counts) {
  const Mesh m = generate_structured({0.0, 0.0}, {2.0, 1.0}, {11, 11}, ElementKind::quad4);
  EXPECT_EQ(m.num_nodes(), 121u);
  EXPECT_EQ(m.num_elements(), 100u);
  EXPECT_NO_THROW(m.validate());
}

TEST(StructuredMesh, MinimalLattice) {
  const Mesh m = generate_structured({0.0, 0.0}, {1.0, 1.0}, {2, 2}, ElementKind::quad4);
  EXPECT_EQ(m.num_nodes(), 4u);
  EXPECT_EQ(m.num_elements(), 1u);
  EXPECT_EQ(m.boundary_edges().size(), 4u);
}

TEST(StructuredMesh, Tri3CountsAndArea) {
  const Mesh m = generate_structured({0.0, 0.0}, {2.0, 1.0}, {3, 3}, ElementKind::tri3);
  EXPECT_EQ(m.num_nodes(), 9u);
  EXPECT_EQ(m.num_elements(), 8u);
  EXPECT_NEAR(summed_area(m), 2.0, 1e-12);
  EXPECT_NO_THROW(m.validate());
}

TEST(StructuredMesh, AreaAndBoundaryCountsOverManyLattices) {
  for (auto kind : {ElementKind::quad4, ElementKind::tri3}) {
    for (std::size_t nx : {2u, 3u, 7u, 16u}) {
      for (std::size_t ny : {2u, 5u, 11u}) {
        const double lx = 0.3 + 0.1 * double(nx), ly = 1.7;
        const Mesh m = generate_structured({-1.0, 2.5}, {lx, ly}, {nx, ny}, kind);
        EXPECT_NEAR(summed_area(m), lx * ly, 1e-12 * lx * ly);
        EXPECT_NEAR(m.total_area(), lx * ly, 1e-12 * lx * ly);
        EXPECT_EQ(m.boundary_edges().size(), 2 * (nx - 1) + 2 * (ny - 1));
        for (std::size_t e = 0; e < m.num_elements(); ++e) EXPECT_GT(Mesh::polygon_area(m.element_coords(e)), 0.0);
      }
    }
  }
}

TEST(StructuredMesh, InteriorQuadNodesSharedByFourElements) {
  const std::size_t n = 9;
  const Mesh m = generate_structured({0.0, 0.0}, {1.0, 1.0}, {n, n}, ElementKind::quad4);
  std::vector<int> count(m.num_nodes(), 0);
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    for (auto v : m.element(e)) ++count[v];
  const auto& info = *m.structured();
  for (std::size_t j = 1; j + 1 < n; ++j)
    for (std::size_t i = 1; i + 1 < n; ++i) EXPECT_EQ(count[info.node(i, j)], 4);
}

TEST(StructuredMesh, SideMarkersAndRowMajorNumbering) {
  const Mesh m = generate_structured({0.0, 0.0}, {2.0, 1.0}, {5, 3}, ElementKind::quad4);
  std::map<std::string, int> per_side;
  for (const auto& e : m.boundary_edges()) ++per_side[e.marker];
  EXPECT_EQ(per_side["bottom"], 4);
  EXPECT_EQ(per_side["top"], 4);
  EXPECT_EQ(per_side["left"], 2);
  EXPECT_EQ(per_side["right"], 2);
  EXPECT_DOUBLE_EQ(m.node(1).x, 0.5);
  EXPECT_DOUBLE_EQ(m.node(5).y, 0.5);
  EXPECT_EQ(m.node(14).x, 2.0);
  EXPECT_EQ(m.node(14).y, 1.0);
}

TEST(StructuredMesh, RejectsBadInput) {
  EXPECT_THROW(generate_structured({0, 0}, {1.0, 1.0}, {1, 5}, ElementKind::quad4), MeshError);
  EXPECT_THROW(generate_structured({0, 0}, {1.0, 1.0}, {5, 1}, ElementKind::tri3), MeshError);
  EXPECT_THROW(generate_structured({0, 0}, {0.0, 1.0}, {5, 5}, ElementKind::quad4), MeshError);
  EXPECT_THROW(generate_structured({0, 0}, {1.0, -2.0}, {5, 5}, ElementKind::quad4), MeshError);
}

TEST(StructuredMesh, SplitMarkerKeepsCoverage) {
  Mesh m = generate_structured({0.0, 0.0}, {2.0, 1.0}, {13, 13}, ElementKind::quad4);
  m.set_all_roles(BcRole::neumann);
  m.split_marker("left", "inlet", BcRole::dirichlet, [](const Point2& p) { return p.y < 1.0 / 6.0; });
  EXPECT_NO_THROW(m.validate());
  EXPECT_TRUE(m.has_dirichlet());
  int inlet = 0;
  for (const auto& e : m.boundary_edges()) inlet += e.marker == "inlet";
  EXPECT_EQ(inlet, 2);
  // Both endpoints of the two inlet edges are Dirichlet nodes: y = 0, 1/12, 2/12.
  EXPECT_EQ(m.dirichlet_nodes().size(), 3u);
}

TEST(StructuredMesh, DetectsMissingRole) {
  Mesh m = generate_structured({0.0, 0.0}, {1.0, 1.0}, {3, 3}, ElementKind::quad4);
  EXPECT_THROW(m.role("nowhere"), MeshError);
}

TEST(StructuredMesh, DetectsInvertedElement) {
  Mesh bad(ElementKind::tri3, {{0, 0}, {1, 0}, {0, 1}}, {0, 2, 1},
           {{0, 1, "s"}, {1, 2, "s"}, {2, 0, "s"}}, {{"s", BcRole::dirichlet}});
  EXPECT_THROW(bad.validate(), MeshError);
}

TEST(StructuredMesh, NearestNodeAndMeshSize) {
  const Mesh m = generate_structured({0.0, 0.0}, {2.0, 1.0}, {21, 21}, ElementKind::quad4);
  const auto n = nearest_node(m, {0.2, 0.3});
  EXPECT_NEAR(m.node(n).x, 0.2, 1e-12);
  EXPECT_NEAR(m.node(n).y, 0.3, 1e-12);
  EXPECT_NEAR(mesh_size(m), 0.1, 1e-12);
  const Mesh t = generate_structured({0.0, 0.0}, {2.0, 1.0}, {21, 21}, ElementKind::tri3);
  EXPECT_NEAR(mesh_size(t), std::hypot(0.1, 0.05), 1e-12);
}
