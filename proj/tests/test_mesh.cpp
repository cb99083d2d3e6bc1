#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <pffrac/mesh.hpp>

using namespace pffrac;

namespace {

// Shoelace area of every triangle, summed.
double shoelace_total(const Mesh& m) {
  double total = 0.0;
  for (const auto& t : m.triangles) {
    double twice = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Point& a = m.nodes[t[k]];
      const Point& b = m.nodes[t[(k + 1) % 3]];
      twice += a.x() * b.y() - b.x() * a.y();
    }
    total += 0.5 * twice;
  }
  return total;
}

// Brute force: count node pairs shared by one or two triangles.
std::pair<int, int> enumerate_edges(const Mesh& m) {
  int all = 0, boundary = 0;
  const int n = static_cast<int>(m.nodes.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      int count = 0;
      for (const auto& t : m.triangles) {
        const bool ha = t[0] == a || t[1] == a || t[2] == a;
        const bool hb = t[0] == b || t[1] == b || t[2] == b;
        count += ha && hb;
      }
      if (count > 0) ++all;
      if (count == 1) ++boundary;
    }
  }
  return {all, boundary};
}

const char* unit_square_text =
    "nodes 4\n"
    "0 0 bottom|left\n"
    "1 0 bottom|right\n"
    "1 1 top|right\n"
    "0 1 top|left\n"
    "triangles 2\n"
    "0 1 2\n"
    "0 2 3\n";

}  // namespace

TEST(RectMesh, SmallestGrid) {
  const Mesh m = build_rect_mesh(1, 1);
  EXPECT_EQ(m.n_nodes(), 4u);
  EXPECT_EQ(m.n_triangles(), 2u);
  for (auto marker : m.markers) EXPECT_NE(marker, 0);
}

TEST(RectMesh, CountingFormula) {
  const Mesh m = build_rect_mesh(2, 2);
  EXPECT_EQ(m.n_nodes(), 9u);
  EXPECT_EQ(m.n_triangles(), 8u);
  EXPECT_EQ(m.markers[4], 0);  // center node
  EXPECT_EQ(m.markers[8], bit(Marker::top) | bit(Marker::right));
}

TEST(RectMesh, AreaMatchesShoelace) {
  const Mesh m = build_rect_mesh(4, 4);
  EXPECT_NEAR(shoelace_total(m), 1.0, 1e-12);
  const Mesh r = build_rect_mesh(3, 5, Rect{-1.0, 2.0, 0.5, 4.0});
  EXPECT_NEAR(shoelace_total(r), 1.5 * 2.0, 1e-12);
  for (std::size_t t = 0; t < r.n_triangles(); ++t) EXPECT_GT(r.signed_area(t), 0.0);
}

TEST(RectMesh, RejectsDegenerateInput) {
  EXPECT_THROW(build_rect_mesh(0, 1), std::invalid_argument);
  EXPECT_THROW(build_rect_mesh(2, 2, Rect{0, 0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(build_rect_mesh(2, 2, Rect{0, 0, 1, 0}), std::invalid_argument);
}

TEST(HoleMesh, HoleNodesLieOnCircle) {
  const Point c{0.5, 0.5};
  const Mesh m = build_square_with_hole(40, 0.2, c);
  int n_hole = 0;
  for (std::size_t v = 0; v < m.n_nodes(); ++v) {
    if (has(m.markers[v], Marker::hole)) {
      ++n_hole;
      EXPECT_NEAR((m.nodes[v] - c).norm(), 0.2, 1e-9);
    }
  }
  EXPECT_GT(n_hole, 20);
}

TEST(HoleMesh, AreaApproximatesPerforatedSquare) {
  const Mesh m = build_square_with_hole(40, 0.2);
  EXPECT_NEAR(shoelace_total(m), 1.0 - std::numbers::pi * 0.04, 0.01);
}

TEST(HoleMesh, ValidOnResolutionsUsedByTheExperiments) {
  for (int n : {20, 40, 80}) {
    const Mesh m = build_square_with_hole(n, 0.2);
    EXPECT_NO_THROW(validate(m)) << "n = " << n;
    for (std::size_t t = 0; t < m.n_triangles(); ++t) EXPECT_GT(m.signed_area(t), 1e-14);
    const auto topo = compute_edge_topology(m);
    EXPECT_EQ(2 * topo.edges.size(), 3 * m.n_triangles() + topo.boundary_edge_ids.size());
  }
}

TEST(HoleMesh, CoarseGridIsRejectedNotDegenerate) {
  try {
    const Mesh m = build_square_with_hole(4, 0.2);
    validate(m);
    for (std::size_t t = 0; t < m.n_triangles(); ++t) EXPECT_GE(m.signed_area(t), 1e-14);
  } catch (const std::invalid_argument& e) {
    SUCCEED() << e.what();
  }
}

TEST(HoleMesh, RejectsHoleCrossingBoundary) {
  EXPECT_THROW(build_square_with_hole(40, 0.2, Point{0.1, 0.5}), std::invalid_argument);
  EXPECT_THROW(build_square_with_hole(40, 0.6), std::invalid_argument);
}

TEST(HoleMesh, OffCenterHole) {
  const Point c{0.4, 0.55};
  const Mesh m = build_square_with_hole(50, 0.15, c);
  for (std::size_t v = 0; v < m.n_nodes(); ++v)
    if (has(m.markers[v], Marker::hole)) EXPECT_NEAR((m.nodes[v] - c).norm(), 0.15, 1e-9);
}

TEST(MeshIO, ReadsUnitSquare) {
  std::istringstream in(unit_square_text);
  const Mesh m = read_mesh(in);
  ASSERT_EQ(m.n_triangles(), 2u);
  EXPECT_GT(m.signed_area(0), 0.0);
  EXPECT_GT(m.signed_area(1), 0.0);
  EXPECT_EQ(m.markers[2], bit(Marker::top) | bit(Marker::right));
}

TEST(MeshIO, RoundTrip) {
  const Mesh m = build_rect_mesh(2, 2);
  std::stringstream s;
  write_mesh(m, s);
  const Mesh r = read_mesh(s);
  ASSERT_EQ(r.n_nodes(), m.n_nodes());
  EXPECT_EQ(r.triangles, m.triangles);
  EXPECT_EQ(r.markers, m.markers);
  for (std::size_t v = 0; v < m.n_nodes(); ++v) EXPECT_EQ(r.nodes[v], m.nodes[v]);

  const Mesh hole = build_square_with_hole(20, 0.2);
  std::stringstream s2;
  write_mesh(hole, s2);
  const Mesh r2 = read_mesh(s2);
  for (std::size_t v = 0; v < hole.n_nodes(); ++v) EXPECT_EQ(r2.nodes[v], hole.nodes[v]);
  EXPECT_EQ(r2.triangles, hole.triangles);
}

TEST(MeshIO, IndexOutOfRangeNamesLine) {
  std::string text = unit_square_text;
  text.replace(text.find("0 2 3"), 5, "0 2 99");
  std::istringstream in(text);
  try {
    read_mesh(in);
    FAIL() << "expected a parse error";
  } catch (const MeshParseError& e) {
    EXPECT_EQ(e.line(), 8u);
    EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
  }
}

TEST(MeshIO, MalformedInput) {
  {
    std::istringstream in("vertices 4\n");
    EXPECT_THROW(read_mesh(in), MeshParseError);
  }
  {
    std::string text = unit_square_text;
    text.replace(text.find("1 1 top"), 3, "1 x");
    std::istringstream in(text);
    try {
      read_mesh(in);
      FAIL();
    } catch (const MeshParseError& e) {
      EXPECT_EQ(e.line(), 4u);
    }
  }
  {
    std::istringstream in("nodes 2\n0 0 interior\n");
    EXPECT_THROW(read_mesh(in), MeshParseError);
  }
}

TEST(EdgeTopology, UnitSquareCounts) {
  std::istringstream in(unit_square_text);
  const auto topo = compute_edge_topology(read_mesh(in));
  EXPECT_EQ(topo.edges.size(), 5u);
  EXPECT_EQ(topo.interior_edge_ids.size(), 1u);
  EXPECT_EQ(topo.boundary_edge_ids.size(), 4u);
}

TEST(EdgeTopology, MatchesBruteForceEnumeration) {
  for (auto [nx, ny] : {std::pair{2, 2}, std::pair{3, 1}, std::pair{4, 3}}) {
    const Mesh m = build_rect_mesh(nx, ny);
    const auto topo = compute_edge_topology(m);
    const auto [all, boundary] = enumerate_edges(m);
    EXPECT_EQ(static_cast<int>(topo.edges.size()), all);
    EXPECT_EQ(static_cast<int>(topo.boundary_edge_ids.size()), boundary);
  }
  const auto topo = compute_edge_topology(build_rect_mesh(2, 2));
  EXPECT_EQ(topo.edges.size(), 16u);
  EXPECT_EQ(topo.boundary_edge_ids.size(), 8u);
}

TEST(EdgeTopology, GeometryInvariants) {
  for (const Mesh& m : {build_rect_mesh(4, 4), build_square_with_hole(20, 0.2)}) {
    const auto topo = compute_edge_topology(m);
    EXPECT_EQ(2 * topo.edges.size(), 3 * m.n_triangles() + topo.boundary_edge_ids.size());
    for (const auto& e : topo.edges) {
      EXPECT_NEAR(e.normal.norm(), 1.0, 1e-12);
      EXPECT_NEAR(e.length, (m.nodes[e.nodes[0]] - m.nodes[e.nodes[1]]).norm(), 1e-12);
      EXPECT_NEAR(e.normal.dot(m.nodes[e.nodes[1]] - m.nodes[e.nodes[0]]), 0.0, 1e-12);
      EXPECT_LT(e.nodes[0], e.nodes[1]);
      if (e.is_boundary()) {
        const Point mid = 0.5 * (m.nodes[e.nodes[0]] + m.nodes[e.nodes[1]]);
        EXPECT_GT(e.normal.dot(mid - m.centroid(e.elem_minus)), 0.0);
      } else {
        EXPECT_LT(e.elem_minus, e.elem_plus);
        EXPECT_GT(e.normal.dot(m.centroid(e.elem_plus) - m.centroid(e.elem_minus)), 0.0);
      }
    }
  }
}

TEST(EdgeTopology, PerimeterOfUnitSquare) {
  const Mesh m = build_rect_mesh(5, 3);
  const auto topo = compute_edge_topology(m);
  double perimeter = 0.0;
  for (int e : topo.boundary_edge_ids) perimeter += topo.edges[e].length;
  EXPECT_NEAR(perimeter, 4.0, 1e-12);
}

TEST(EdgeTopology, BoundaryEdgeMarkers) {
  const Mesh m = build_rect_mesh(3, 3);
  const auto topo = compute_edge_topology(m);
  int top = 0;
  for (int e : topo.boundary_edge_ids) {
    const auto& edge = topo.edges[e];
    if (has(edge.marker, Marker::top)) {
      ++top;
      EXPECT_NEAR(edge.normal.y(), 1.0, 1e-14);
    }
  }
  EXPECT_EQ(top, 3);
}

TEST(EdgeTopology, RejectsNonManifoldEdge) {
  Mesh m = build_rect_mesh(1, 1);
  m.nodes.push_back(Point{2.0, 0.5});
  m.markers.push_back(bit(Marker::right));
  m.triangles.push_back({0, 4, 3});  // third triangle on the diagonal (0, 3)
  EXPECT_THROW(compute_edge_topology(m), std::invalid_argument);
}
