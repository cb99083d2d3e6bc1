#pragma once

// Straight-edged triangle meshes, boundary tagging, the neutral text format
// and edge topology (adjacency, normals, lengths) for interior-penalty terms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pffrac {

using Point = Eigen::Vector2d;

/// Boundary tags live on nodes as a bit set so corner nodes can carry two
/// sides at once (e.g. `top|left`).
enum class Marker : std::uint8_t {
  interior = 0,
  top = 1 << 0,
  bottom = 1 << 1,
  left = 1 << 2,
  right = 1 << 3,
  hole = 1 << 4,
};

using MarkerSet = std::uint8_t;

constexpr MarkerSet bit(Marker m) { return static_cast<MarkerSet>(m); }
constexpr bool has(MarkerSet s, Marker m) { return (s & bit(m)) != 0; }

inline std::string marker_to_string(MarkerSet s) {
  if (s == 0) return "interior";
  static constexpr std::array<std::pair<Marker, const char*>, 5> names{{
      {Marker::top, "top"},
      {Marker::bottom, "bottom"},
      {Marker::left, "left"},
      {Marker::right, "right"},
      {Marker::hole, "hole"},
  }};
  std::string out;
  for (const auto& [m, name] : names) {
    if (has(s, m)) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

/// Inverse of marker_to_string; throws std::invalid_argument on unknown tags.
inline MarkerSet marker_from_string(const std::string& text) {
  MarkerSet s = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('|', start);
    if (end == std::string::npos) end = text.size();
    const std::string tok = text.substr(start, end - start);
    if (tok == "interior") {
    } else if (tok == "top") {
      s |= bit(Marker::top);
    } else if (tok == "bottom") {
      s |= bit(Marker::bottom);
    } else if (tok == "left") {
      s |= bit(Marker::left);
    } else if (tok == "right") {
      s |= bit(Marker::right);
    } else if (tok == "hole") {
      s |= bit(Marker::hole);
    } else {
      throw std::invalid_argument("unknown boundary marker '" + tok + "'");
    }
    start = end + 1;
  }
  return s;
}

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<MarkerSet> markers;             // one per node

  [[nodiscard]] std::size_t n_nodes() const { return nodes.size(); }
  [[nodiscard]] std::size_t n_triangles() const { return triangles.size(); }

  [[nodiscard]] double signed_area(std::size_t t) const {
    const auto& tri = triangles[t];
    const Point& a = nodes[tri[0]];
    const Point& b = nodes[tri[1]];
    const Point& c = nodes[tri[2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }

  [[nodiscard]] Point centroid(std::size_t t) const {
    const auto& tri = triangles[t];
    return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
  }
};

namespace detail {

using EdgeKey = std::pair<int, int>;

inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

// Local edge k of a triangle joins local vertices k and (k+1)%3.
inline std::map<EdgeKey, std::vector<int>> edge_adjacency(const Mesh& mesh) {
  std::map<EdgeKey, std::vector<int>> adj;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) adj[edge_key(tri[k], tri[(k + 1) % 3])].push_back(static_cast<int>(t));
  }
  return adj;
}

}  // namespace detail

/// Checks index range, positive orientation and boundary tagging.
inline void validate(const Mesh& mesh) {
  if (mesh.markers.size() != mesh.nodes.size())
    throw std::invalid_argument("mesh: marker count does not match node count");
  const int n = static_cast<int>(mesh.nodes.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || v >= n)
        throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " references node " +
                                    std::to_string(v) + " out of range");
    }
    if (!(mesh.signed_area(t) > 0.0))
      throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " has non-positive area");
  }
  for (const auto& [key, elems] : detail::edge_adjacency(mesh)) {
    if (elems.size() == 1 && (mesh.markers[key.first] == 0 || mesh.markers[key.second] == 0))
      throw std::invalid_argument("mesh: boundary edge (" + std::to_string(key.first) + ", " +
                                  std::to_string(key.second) + ") has an untagged endpoint");
  }
}

/// Structured grid on `bounds` split along SW-NE diagonals.
inline Mesh build_rect_mesh(int nx, int ny, const Rect& bounds = {}) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_rect_mesh: nx and ny must be >= 1");
  const double w = bounds.x1 - bounds.x0;
  const double h = bounds.y1 - bounds.y0;
  if (!(w > 0.0) || !(h > 0.0)) throw std::invalid_argument("build_rect_mesh: degenerate bounds");

  constexpr double tol = 1e-12;
  Mesh mesh;
  mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Point x{bounds.x0 + w * i / nx, bounds.y0 + h * j / ny};
      MarkerSet m = 0;
      if (std::abs(x.y() - bounds.y1) <= tol) m |= bit(Marker::top);
      if (std::abs(x.y() - bounds.y0) <= tol) m |= bit(Marker::bottom);
      if (std::abs(x.x() - bounds.x0) <= tol) m |= bit(Marker::left);
      if (std::abs(x.x() - bounds.x1) <= tol) m |= bit(Marker::right);
      mesh.nodes.push_back(x);
      mesh.markers.push_back(m);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int sw = id(i, j), se = id(i + 1, j), ne = id(i + 1, j + 1), nw = id(i, j + 1);
      mesh.triangles.push_back({sw, se, ne});
      mesh.triangles.push_back({sw, ne, nw});
    }
  }
  return mesh;
}

namespace detail {

// Shape quality 4 sqrt(3) area / sum of squared edge lengths: 1 for an
// equilateral triangle, <= 0 when inverted.
inline double shape_quality(const Point& a, const Point& b, const Point& c) {
  const double area = 0.5 * ((b - a).x() * (c - a).y() - (c - a).x() * (b - a).y());
  return 4.0 * std::sqrt(3.0) * area / ((b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm());
}

}  // namespace detail

/// Unit square with a circular hole: grid triangles whose centroid falls in
/// the disk are removed and the nodes bounding the cavity are projected
/// radially onto the circle, together with nodes lying within 0.8h outside it.
/// Triangles left too small by the projection are removed as well, then free
/// nodes within 3h of the hole are smoothed.
inline Mesh build_square_with_hole(int n, double radius, const Point& center = Point{0.5, 0.5}) {
  if (n < 1) throw std::invalid_argument("build_square_with_hole: n must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("build_square_with_hole: radius must be positive");
  if (!(center.x() - radius > 0.0 && center.x() + radius < 1.0 && center.y() - radius > 0.0 &&
        center.y() + radius < 1.0))
    throw std::invalid_argument("build_square_with_hole: hole intersects the outer boundary");

  Mesh grid = build_rect_mesh(n, n);
  auto inside = [&](const Point& x) { return (x - center).norm() < radius; };

  bool cell_inside = false;
  for (int j = 0; j < n && !cell_inside; ++j) {
    for (int i = 0; i < n && !cell_inside; ++i) {
      const int id0 = j * (n + 1) + i;
      cell_inside = inside(grid.nodes[id0]) && inside(grid.nodes[id0 + 1]) &&
                    inside(grid.nodes[id0 + n + 1]) && inside(grid.nodes[id0 + n + 2]);
    }
  }
  if (!cell_inside)
    throw std::invalid_argument("build_square_with_hole: grid too coarse, no cell lies inside the hole (n=" +
                                std::to_string(n) + ")");

  std::vector<char> keep(grid.triangles.size());
  for (std::size_t t = 0; t < grid.triangles.size(); ++t) keep[t] = !inside(grid.centroid(t));

  // Snap the cavity boundary onto the circle. Kept triangles that degenerate
  // under the snap are dropped and the snap is redone on the enlarged cavity.
  const std::vector<Point> original = grid.nodes;
  const auto adjacency = detail::edge_adjacency(grid);
  std::vector<char> project(grid.nodes.size(), 0);
  for (int pass = 0;; ++pass) {
    if (pass > 8) throw std::invalid_argument("build_square_with_hole: cannot fit the hole to the grid (n=" + std::to_string(n) + ")");
    std::fill(project.begin(), project.end(), 0);
    for (const auto& [key, elems] : adjacency) {
      if (elems.size() == 2 && keep[elems[0]] != keep[elems[1]]) {
        project[key.first] = 1;
        project[key.second] = 1;
      }
    }
    for (std::size_t t = 0; t < grid.triangles.size(); ++t) {
      if (!keep[t]) continue;
      for (int v : grid.triangles[t])
        if (inside(original[v])) project[v] = 1;
    }
    // nodes hugging the circle next to the rim would leave slivers
    std::vector<char> near = project;
    for (std::size_t t = 0; t < grid.triangles.size(); ++t) {
      if (!keep[t]) continue;
      const auto& tri = grid.triangles[t];
      if (!(project[tri[0]] || project[tri[1]] || project[tri[2]])) continue;
      for (int v : tri)
        if ((original[v] - center).norm() < radius + 0.8 / n && grid.markers[v] == 0) near[v] = 1;
    }
    project.swap(near);
    for (std::size_t v = 0; v < grid.nodes.size(); ++v) {
      grid.nodes[v] = original[v];
      if (!project[v]) continue;
      const Point r = original[v] - center;
      const double dist = r.norm();
      if (dist == 0.0) throw std::invalid_argument("build_square_with_hole: node at hole center");
      grid.nodes[v] = center + r * (radius / dist);
    }
    const double cell_area = 0.5 / (static_cast<double>(n) * n);
    bool changed = false;
    for (std::size_t t = 0; t < grid.triangles.size(); ++t) {
      if (!keep[t]) continue;
      const auto& tri = grid.triangles[t];
      const bool chord = project[tri[0]] && project[tri[1]] && project[tri[2]];
      if (chord || grid.signed_area(t) < 0.25 * cell_area) {
        keep[t] = 0;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Laplacian smoothing of the interior nodes near the hole, rim nodes
  // constrained to the circle; a move is kept only if it improves the worst
  // incident triangle.
  {
    const double h = 1.0 / n;
    std::vector<std::vector<int>> incident(grid.nodes.size());
    for (std::size_t t = 0; t < grid.triangles.size(); ++t)
      if (keep[t])
        for (int v : grid.triangles[t]) incident[v].push_back(static_cast<int>(t));
    // rim edge of each kept triangle on the cavity, as a local vertex index
    // pair; the edge height relative to its length enters the quality
    std::vector<std::vector<std::pair<int, int>>> rim(grid.triangles.size());
    for (const auto& [key, elems] : adjacency) {
      if (elems.size() != 2 || keep[elems[0]] == keep[elems[1]]) continue;
      for (int t : elems)
        if (keep[t]) rim[t].emplace_back(key.first, key.second);
    }
    auto worst = [&](int v) {
      double q = 1.0;
      for (int t : incident[v]) {
        const auto& tri = grid.triangles[t];
        const double area = grid.signed_area(t);
        q = std::min(q, detail::shape_quality(grid.nodes[tri[0]], grid.nodes[tri[1]], grid.nodes[tri[2]]));
        for (const auto& [a, b] : rim[t])
          q = std::min(q, 4.0 * area / (std::sqrt(3.0) * (grid.nodes[a] - grid.nodes[b]).squaredNorm()));
      }
      return q;
    };
    for (int sweep = 0; sweep < 30; ++sweep) {
      for (std::size_t v = 0; v < grid.nodes.size(); ++v) {
        if (incident[v].empty() || grid.markers[v] != 0) continue;
        if ((grid.nodes[v] - center).norm() > radius + 3.0 * h) continue;
        Point avg = Point::Zero();
        int count = 0;
        for (int t : incident[v])
          for (int w : grid.triangles[t])
            if (w != static_cast<int>(v)) {
              avg += grid.nodes[w];
              ++count;
            }
        avg /= count;
        const Point old = grid.nodes[v];
        double best = worst(static_cast<int>(v));
        Point best_x = old;
        for (double step : {1.0, 0.5, 0.25}) {
          Point x = old + step * (avg - old);
          if (project[v]) x = center + (x - center).normalized() * radius;  // slide along the rim
          grid.nodes[v] = x;
          if (const double q = worst(static_cast<int>(v)); q > best) {
            best = q;
            best_x = x;
          }
        }
        grid.nodes[v] = best_x;
      }
    }
  }

  Mesh mesh;
  std::vector<int> renumber(grid.nodes.size(), -1);
  for (std::size_t t = 0; t < grid.triangles.size(); ++t) {
    if (!keep[t]) continue;
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const int v = grid.triangles[t][k];
      if (renumber[v] < 0) {
        renumber[v] = static_cast<int>(mesh.nodes.size());
        MarkerSet m = grid.markers[v];
        if (project[v] || std::abs((grid.nodes[v] - center).norm() - radius) <= 1e-9) m |= bit(Marker::hole);
        mesh.nodes.push_back(grid.nodes[v]);
        mesh.markers.push_back(m);
      }
      tri[k] = renumber[v];
    }
    mesh.triangles.push_back(tri);
  }

  // Renumber nodes in ascending original order so output is independent of
  // the triangle traversal.
  std::vector<int> order(mesh.nodes.size());
  {
    std::vector<std::pair<int, int>> orig;  // (original id, new id)
    for (std::size_t v = 0; v < renumber.size(); ++v)
      if (renumber[v] >= 0) orig.emplace_back(static_cast<int>(v), renumber[v]);
    std::sort(orig.begin(), orig.end());
    Mesh sorted;
    sorted.nodes.reserve(orig.size());
    for (std::size_t k = 0; k < orig.size(); ++k) {
      order[orig[k].second] = static_cast<int>(k);
      sorted.nodes.push_back(mesh.nodes[orig[k].second]);
      sorted.markers.push_back(mesh.markers[orig[k].second]);
    }
    for (auto& tri : mesh.triangles)
      for (int& v : tri) v = order[v];
    sorted.triangles = std::move(mesh.triangles);
    mesh = std::move(sorted);
  }

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double a = mesh.signed_area(t);
    if (a < 1e-14) {
      std::ostringstream msg;
      msg << "build_square_with_hole: triangle " << t << " has area " << a
          << " after projection onto the hole; choose a different grid resolution (n=" << n << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  validate(mesh);
  return mesh;
}

/// Error raised by read_mesh; carries the 1-based line number.
class MeshParseError : public std::runtime_error {
 public:
  MeshParseError(std::size_t line, const std::string& what)
      : std::runtime_error("mesh line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline void write_mesh(const Mesh& mesh, std::ostream& out) {
  const auto old_prec = out.precision(17);
  out << "nodes " << mesh.nodes.size() << '\n';
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
    out << mesh.nodes[v].x() << ' ' << mesh.nodes[v].y() << ' ' << marker_to_string(mesh.markers[v]) << '\n';
  out << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out.precision(old_prec);
}

inline Mesh read_mesh(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;

  auto next_tokens = [&](std::size_t expected, const char* what) {
    if (!std::getline(in, line)) throw MeshParseError(line_no + 1, std::string("unexpected end of file, expected ") + what);
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.size() != expected)
      throw MeshParseError(line_no, std::string("expected ") + what + ", got '" + line + "'");
    return tok;
  };
  auto to_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || !std::isfinite(v)) throw MeshParseError(line_no, "non-numeric token '" + s + "'");
    return v;
  };
  auto to_count = [&](const std::string& s) {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v < 0) throw MeshParseError(line_no, "invalid integer '" + s + "'");
    return v;
  };

  Mesh mesh;
  auto header = next_tokens(2, "'nodes <N>'");
  if (header[0] != "nodes") throw MeshParseError(line_no, "malformed header, expected 'nodes <N>'");
  const auto n_nodes = static_cast<std::size_t>(to_count(header[1]));
  for (std::size_t i = 0; i < n_nodes; ++i) {
    auto tok = next_tokens(3, "'<x> <y> <marker>'");
    mesh.nodes.emplace_back(to_double(tok[0]), to_double(tok[1]));
    try {
      mesh.markers.push_back(marker_from_string(tok[2]));
    } catch (const std::invalid_argument& e) {
      throw MeshParseError(line_no, e.what());
    }
  }
  header = next_tokens(2, "'triangles <M>'");
  if (header[0] != "triangles") throw MeshParseError(line_no, "malformed header, expected 'triangles <M>'");
  const auto n_tri = static_cast<std::size_t>(to_count(header[1]));
  for (std::size_t i = 0; i < n_tri; ++i) {
    auto tok = next_tokens(3, "'<i0> <i1> <i2>'");
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const auto v = to_count(tok[k]);
      if (v >= static_cast<long long>(n_nodes))
        throw MeshParseError(line_no, "node index " + tok[k] + " out of range (" + std::to_string(n_nodes) + " nodes)");
      tri[k] = static_cast<int>(v);
    }
    mesh.triangles.push_back(tri);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw MeshParseError(line_no, "trailing content");
  }
  validate(mesh);
  return mesh;
}

struct Edge {
  std::array<int, 2> nodes{};  // ascending global index
  int elem_minus = -1;
  int elem_plus = -1;  // -1 on the boundary
  Point normal = Point::Zero();  // minus -> plus, or outward on the boundary
  double length = 0.0;
  MarkerSet marker = 0;  // boundary edges only: intersection of endpoint tags

  [[nodiscard]] bool is_boundary() const { return elem_plus < 0; }
};

struct EdgeTopology {
  std::vector<Edge> edges;
  std::vector<int> interior_edge_ids;
  std::vector<int> boundary_edge_ids;
  std::vector<std::array<int, 3>> element_edges;  // local edge k joins local vertices k, k+1
};

inline EdgeTopology compute_edge_topology(const Mesh& mesh) {
  EdgeTopology topo;
  topo.element_edges.resize(mesh.triangles.size());
  const auto adj = detail::edge_adjacency(mesh);
  topo.edges.reserve(adj.size());
  for (const auto& [key, elems] : adj) {
    if (elems.size() > 2)
      throw std::invalid_argument("compute_edge_topology: non-manifold edge (" + std::to_string(key.first) + ", " +
                                  std::to_string(key.second) + ")");
    Edge e;
    e.nodes = {key.first, key.second};
    e.elem_minus = std::min(elems.front(), elems.back());
    e.elem_plus = elems.size() == 2 ? std::max(elems[0], elems[1]) : -1;
    const Point a = mesh.nodes[key.first];
    const Point b = mesh.nodes[key.second];
    e.length = (b - a).norm();
    Point n{(b - a).y(), -(b - a).x()};
    n /= e.length;
    const Point toward = e.is_boundary() ? Point(0.5 * (a + b) - mesh.centroid(e.elem_minus))
                                         : Point(mesh.centroid(e.elem_plus) - mesh.centroid(e.elem_minus));
    if (n.dot(toward) < 0.0) n = -n;
    e.normal = n;
    if (e.is_boundary()) e.marker = mesh.markers[key.first] & mesh.markers[key.second];

    const int id = static_cast<int>(topo.edges.size());
    (e.is_boundary() ? topo.boundary_edge_ids : topo.interior_edge_ids).push_back(id);
    for (int t : elems) {
      const auto& tri = mesh.triangles[t];
      for (int k = 0; k < 3; ++k)
        if (detail::edge_key(tri[k], tri[(k + 1) % 3]) == key) topo.element_edges[t][k] = id;
    }
    topo.edges.push_back(e);
  }
  return topo;
}

}  // namespace pffrac
