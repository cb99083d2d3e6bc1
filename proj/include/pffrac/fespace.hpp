#pragma once

// Continuous degree-p Lagrange spaces on a triangle mesh: global dof
// numbering, affine push-forward of basis derivatives, and one-sided edge
// traces used by the interior-penalty terms.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "lagrange.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace pffrac {

/// Reference-coordinate values, gradients and Hessians at a single point.
struct ReferenceBasisValues {
  Eigen::VectorXd values;
  std::vector<Eigen::Vector2d> gradients;
  std::vector<Hessian> hessians;
};

inline ReferenceBasisValues reference_basis(int degree, const Eigen::Vector2d& xi) {
  constexpr double tol = 1e-12;
  if (xi.x() < -tol || xi.y() < -tol || xi.x() + xi.y() > 1.0 + tol)
    throw std::invalid_argument("reference_basis: point outside the reference triangle");
  const LagrangeTriangle fe(degree);
  ReferenceBasisValues out;
  out.values.resize(fe.size());
  out.gradients.resize(fe.size());
  out.hessians.resize(fe.size());
  fe.evaluate(xi, out.values.data(), out.gradients.data(), out.hessians.data());
  return out;
}

/// x = origin + jacobian * xi
struct AffineMap {
  Point origin = Point::Zero();
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d inverse = Eigen::Matrix2d::Identity();
  double det = 1.0;

  [[nodiscard]] Point to_physical(const Eigen::Vector2d& xi) const { return origin + jacobian * xi; }
  [[nodiscard]] Eigen::Vector2d to_reference(const Point& x) const { return inverse * (x - origin); }
};

/// Basis data at the points of a quadrature rule. Rows are points, columns
/// are local dofs. Derivatives are with respect to physical coordinates.
struct BasisEval {
  Eigen::MatrixXd values, dx, dy, dxx, dxy, dyy;
  Eigen::VectorXd jxw;
  std::vector<Point> points;

  [[nodiscard]] Eigen::Index n_points() const { return values.rows(); }
  [[nodiscard]] Eigen::Index n_dofs() const { return values.cols(); }
};

namespace detail {

// Reference derivatives pushed forward through a constant inverse Jacobian G
// (xi = G (x - x0)); second derivatives pick up no curvature term.
inline void push_forward(const Eigen::Matrix2d& g, double rdx, double rdy, const Hessian& rh, double& dx, double& dy,
                         double& dxx, double& dxy, double& dyy) {
  dx = g(0, 0) * rdx + g(1, 0) * rdy;
  dy = g(0, 1) * rdx + g(1, 1) * rdy;
  dxx = g(0, 0) * g(0, 0) * rh[0] + 2.0 * g(0, 0) * g(1, 0) * rh[1] + g(1, 0) * g(1, 0) * rh[2];
  dxy = g(0, 0) * g(0, 1) * rh[0] + (g(0, 0) * g(1, 1) + g(1, 0) * g(0, 1)) * rh[1] + g(1, 0) * g(1, 1) * rh[2];
  dyy = g(0, 1) * g(0, 1) * rh[0] + 2.0 * g(0, 1) * g(1, 1) * rh[1] + g(1, 1) * g(1, 1) * rh[2];
}

}  // namespace detail

/// Reference basis tabulated once at the points of a triangle rule.
struct ReferenceTable {
  QuadratureRule rule;
  Eigen::MatrixXd values;
  std::vector<std::vector<Eigen::Vector2d>> gradients;
  std::vector<std::vector<Hessian>> hessians;

  ReferenceTable(const LagrangeTriangle& fe, QuadratureRule r) : rule(std::move(r)) {
    const auto nq = static_cast<Eigen::Index>(rule.size());
    values.resize(nq, fe.size());
    gradients.assign(nq, std::vector<Eigen::Vector2d>(fe.size()));
    hessians.assign(nq, std::vector<Hessian>(fe.size()));
    std::vector<double> v(fe.size());
    for (Eigen::Index q = 0; q < nq; ++q) {
      fe.evaluate(rule.points[q], v.data(), gradients[q].data(), hessians[q].data());
      for (int i = 0; i < fe.size(); ++i) values(q, i) = v[i];
    }
  }
};

class FESpace {
 public:
  FESpace(Mesh mesh, int degree) : mesh_(std::move(mesh)), fe_(degree) {
    validate(mesh_);
    topo_ = compute_edge_topology(mesh_);
    build_dofs();
  }

  [[nodiscard]] int degree() const { return fe_.degree(); }
  [[nodiscard]] const Mesh& mesh() const { return mesh_; }
  [[nodiscard]] const EdgeTopology& topology() const { return topo_; }
  [[nodiscard]] const LagrangeTriangle& element() const { return fe_; }
  [[nodiscard]] int dofs_per_element() const { return fe_.size(); }
  [[nodiscard]] int n_dofs() const { return static_cast<int>(dof_coords_.size()); }
  [[nodiscard]] int n_elements() const { return static_cast<int>(mesh_.triangles.size()); }
  [[nodiscard]] const std::vector<Point>& dof_coordinates() const { return dof_coords_; }
  /// Boundary tags per dof: vertex dofs inherit the node tag, edge dofs the
  /// tag of their boundary edge, everything else is interior.
  [[nodiscard]] const std::vector<MarkerSet>& dof_markers() const { return dof_markers_; }

  [[nodiscard]] const int* element_dofs(int elem) const {
    return element_dofs_.data() + static_cast<std::size_t>(elem) * fe_.size();
  }

  [[nodiscard]] AffineMap affine_map(int elem) const {
    const auto& tri = mesh_.triangles[elem];
    AffineMap m;
    m.origin = mesh_.nodes[tri[0]];
    m.jacobian.col(0) = mesh_.nodes[tri[1]] - m.origin;
    m.jacobian.col(1) = mesh_.nodes[tri[2]] - m.origin;
    m.det = m.jacobian.determinant();
    if (!(m.det > 0.0)) throw std::invalid_argument("degenerate element " + std::to_string(elem));
    m.inverse = m.jacobian.inverse();
    return m;
  }

  /// Nodal interpolant of f.
  [[nodiscard]] Eigen::VectorXd interpolate(const std::function<double(const Point&)>& f) const {
    Eigen::VectorXd c(n_dofs());
    for (int i = 0; i < n_dofs(); ++i) c[i] = f(dof_coords_[i]);
    return c;
  }

 private:
  void build_dofs() {
    const int p = fe_.degree();
    const int nd = fe_.size();
    const int n_nodes = static_cast<int>(mesh_.nodes.size());
    const int n_edges = static_cast<int>(topo_.edges.size());
    const int edge_offset = n_nodes;
    const int interior_offset = n_nodes + n_edges * (p - 1);
    const int n_total = interior_offset + n_elements() * fe_.n_interior_dofs();

    element_dofs_.assign(static_cast<std::size_t>(n_elements()) * nd, -1);
    dof_coords_.assign(n_total, Point::Zero());
    dof_markers_.assign(n_total, 0);

    for (int t = 0; t < n_elements(); ++t) {
      const auto& tri = mesh_.triangles[t];
      const AffineMap map = affine_map(t);
      int* dofs = element_dofs_.data() + static_cast<std::size_t>(t) * nd;
      int local = 0;
      for (int k = 0; k < 3; ++k) dofs[local++] = tri[k];
      for (int k = 0; k < 3; ++k) {
        const int e = topo_.element_edges[t][k];
        const bool forward = tri[k] == topo_.edges[e].nodes[0];
        for (int s = 1; s < p; ++s) {
          const int pos = forward ? s : p - s;
          dofs[local++] = edge_offset + e * (p - 1) + (pos - 1);
        }
      }
      for (int s = 0; s < fe_.n_interior_dofs(); ++s) dofs[local++] = interior_offset + t * fe_.n_interior_dofs() + s;

      for (int i = 0; i < nd; ++i) dof_coords_[dofs[i]] = map.to_physical(fe_.node(i));
    }
    for (int v = 0; v < n_nodes; ++v) dof_markers_[v] = mesh_.markers[v];
    for (int e = 0; e < n_edges; ++e) {
      if (!topo_.edges[e].is_boundary()) continue;
      for (int s = 0; s < p - 1; ++s) dof_markers_[edge_offset + e * (p - 1) + s] = topo_.edges[e].marker;
    }
  }

  Mesh mesh_;
  EdgeTopology topo_;
  LagrangeTriangle fe_;
  std::vector<int> element_dofs_;
  std::vector<Point> dof_coords_;
  std::vector<MarkerSet> dof_markers_;
};

/// Physical basis data of one element at the points of a tabulated rule.
inline BasisEval physical_eval(const FESpace& space, int elem, const ReferenceTable& table) {
  const AffineMap map = space.affine_map(elem);
  const auto nq = table.values.rows();
  const auto nd = table.values.cols();
  BasisEval ev;
  ev.values = table.values;
  ev.dx.resize(nq, nd);
  ev.dy.resize(nq, nd);
  ev.dxx.resize(nq, nd);
  ev.dxy.resize(nq, nd);
  ev.dyy.resize(nq, nd);
  ev.jxw.resize(nq);
  ev.points.resize(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    ev.jxw[q] = table.rule.weights[q] * map.det;
    ev.points[q] = map.to_physical(table.rule.points[q]);
    for (Eigen::Index i = 0; i < nd; ++i) {
      const auto& g = table.gradients[q][i];
      detail::push_forward(map.inverse, g.x(), g.y(), table.hessians[q][i], ev.dx(q, i), ev.dy(q, i), ev.dxx(q, i),
                           ev.dxy(q, i), ev.dyy(q, i));
    }
  }
  return ev;
}

inline BasisEval physical_eval(const FESpace& space, int elem, const QuadratureRule& rule) {
  return physical_eval(space, elem, ReferenceTable(space.element(), rule));
}

enum class Side { minus, plus };

/// One side's view of an edge: value, n-derivative and nn-derivative of each
/// local basis function of the adjacent element at the edge quadrature points.
/// Points run from the lower-numbered endpoint to the higher one on both sides.
struct EdgeTrace {
  int element = -1;
  Point normal = Point::Zero();
  Eigen::MatrixXd values, dn, dnn;
  Eigen::VectorXd jxw;
  std::vector<Point> points;
};

inline EdgeTrace edge_trace_eval(const FESpace& space, int edge_id, Side side, const QuadratureRule& rule) {
  const Edge& edge = space.topology().edges.at(edge_id);
  if (side == Side::plus && edge.is_boundary())
    throw std::invalid_argument("edge_trace_eval: plus side requested on boundary edge " + std::to_string(edge_id));
  EdgeTrace tr;
  tr.element = side == Side::minus ? edge.elem_minus : edge.elem_plus;
  tr.normal = edge.normal;
  const AffineMap map = space.affine_map(tr.element);
  const Point a = space.mesh().nodes[edge.nodes[0]];
  const Point b = space.mesh().nodes[edge.nodes[1]];
  const auto& fe = space.element();
  const auto nq = static_cast<Eigen::Index>(rule.size());
  const int nd = fe.size();
  tr.values.resize(nq, nd);
  tr.dn.resize(nq, nd);
  tr.dnn.resize(nq, nd);
  tr.jxw.resize(nq);
  tr.points.resize(nq);

  std::vector<double> v(nd);
  std::vector<Eigen::Vector2d> g(nd);
  std::vector<Hessian> h(nd);
  const double nx = edge.normal.x(), ny = edge.normal.y();
  for (Eigen::Index q = 0; q < nq; ++q) {
    const double s = 0.5 * (rule.points[q].x() + 1.0);
    tr.points[q] = a + s * (b - a);
    tr.jxw[q] = 0.5 * rule.weights[q] * edge.length;
    fe.evaluate(map.to_reference(tr.points[q]), v.data(), g.data(), h.data());
    for (int i = 0; i < nd; ++i) {
      double dx, dy, dxx, dxy, dyy;
      detail::push_forward(map.inverse, g[i].x(), g[i].y(), h[i], dx, dy, dxx, dxy, dyy);
      tr.values(q, i) = v[i];
      tr.dn(q, i) = nx * dx + ny * dy;
      tr.dnn(q, i) = nx * nx * dxx + 2.0 * nx * ny * dxy + ny * ny * dyy;
    }
  }
  return tr;
}

}  // namespace pffrac
