#pragma once

// Discrete operators and residuals for the staggered phase-field scheme:
// degraded elastic stiffness, phase-field mass/stiffness, the C0 interior
// penalty Hessian form, and the matching residual vectors.
//
// Jump and average on an interior edge e with normal n (from tau- to tau+):
//   [[dv/dn]]      = dv+/dn - dv-/dn
//   {d2v/dn2}      = (d2v+/dn2 + d2v-/dn2) / 2
// and on a boundary edge with outward normal:
//   [[dv/dn]]      = -dv/dn
//   {d2v/dn2}      = d2v/dn2
// The form is
//   B(u, v) = sum_tau (D2u, D2v)_tau
//           + sum_e ( {d2u/dn2}[[dv/dn]] + [[du/dn]]{d2v/dn2}
//                     + gamma/|e| [[du/dn]][[dv/dn]] )_e.
//
// Displacement dofs are interleaved: component c of scalar dof m is 2m + c.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fespace.hpp"
#include "material.hpp"

namespace pffrac {

using SparseOperator = Eigen::SparseMatrix<double>;

/// Coordinate-format accumulator; duplicates are summed on consolidation.
class CooAssembler {
 public:
  CooAssembler(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {}

  void reserve(std::size_t n) { entries_.reserve(n); }

  void add(Eigen::Index i, Eigen::Index j, double v) {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
      throw std::out_of_range("CooAssembler: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside operator dimensions");
    entries_.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }

  void add_block(const std::vector<int>& rows, const std::vector<int>& cols, const Eigen::MatrixXd& local) {
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b)
        add(rows[a], cols[b], local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  }

  [[nodiscard]] SparseOperator consolidate() const {
    SparseOperator A(rows_, cols_);
    A.setFromTriplets(entries_.begin(), entries_.end());
    A.makeCompressed();
    return A;
  }

 private:
  Eigen::Index rows_, cols_;
  std::vector<Eigen::Triplet<double>> entries_;
};

struct PenaltyConfig {
  double gamma = 5.0;
  bool include_boundary_edges = true;
};

/// gamma keyed by polynomial degree: 2 -> 5, 3 -> 10, 4 -> 20.
inline double default_penalty(int degree) {
  switch (degree) {
    case 2: return 5.0;
    case 3: return 10.0;
    case 4: return 20.0;
    default: throw std::invalid_argument("default_penalty: no default for degree " + std::to_string(degree));
  }
}

/// Selects the parts of B to assemble; all on gives the full form.
struct IpTerms {
  bool element = true;
  bool consistency = true;
  bool penalty = true;
};

inline QuadratureRule element_rule(const FESpace& space) { return triangle_quadrature(2 * space.degree()); }
inline QuadratureRule edge_rule(const FESpace& space) { return edge_quadrature(2 * space.degree()); }

/// Number of history points per element used throughout assembly.
inline int history_points(const FESpace& space) { return static_cast<int>(element_rule(space).size()); }

inline HistoryField make_history(const FESpace& space, double value = 0.0) {
  HistoryField h;
  h.points_per_element = history_points(space);
  h.values.assign(static_cast<std::size_t>(space.n_elements()) * h.points_per_element, value);
  return h;
}

inline FieldState make_state(const FESpace& space) {
  return FieldState{Eigen::VectorXd::Zero(2 * space.n_dofs()), Eigen::VectorXd::Zero(space.n_dofs()),
                    make_history(space)};
}

namespace detail {

inline std::vector<int> dofs_of(const FESpace& space, int elem) {
  const int* d = space.element_dofs(elem);
  return {d, d + space.dofs_per_element()};
}

inline std::vector<int> vector_dofs_of(const FESpace& space, int elem) {
  const int* d = space.element_dofs(elem);
  std::vector<int> out(2 * space.dofs_per_element());
  for (int i = 0; i < space.dofs_per_element(); ++i) {
    out[2 * i] = 2 * d[i];
    out[2 * i + 1] = 2 * d[i] + 1;
  }
  return out;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& global, const std::vector<int>& dofs) {
  Eigen::VectorXd local(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) local[static_cast<Eigen::Index>(i)] = global[dofs[i]];
  return local;
}

inline void scatter_add(Eigen::VectorXd& global, const std::vector<int>& dofs, const Eigen::VectorXd& local) {
  for (std::size_t i = 0; i < dofs.size(); ++i) global[dofs[i]] += local[static_cast<Eigen::Index>(i)];
}

inline void check_history(const FESpace& space, const HistoryField& H) {
  if (H.points_per_element != history_points(space) ||
      H.values.size() != static_cast<std::size_t>(space.n_elements()) * H.points_per_element)
    throw std::invalid_argument("history field does not match the space's quadrature layout");
}

// Jump and average rows of one edge: columns follow `dofs`.
struct EdgeOperators {
  std::vector<int> dofs;
  Eigen::MatrixXd jump, average;  // n_points x dofs.size()
  Eigen::VectorXd jxw;
  double length = 0.0;
};

inline EdgeOperators edge_operators(const FESpace& space, int edge_id, const QuadratureRule& rule) {
  const Edge& edge = space.topology().edges[edge_id];
  const int nd = space.dofs_per_element();
  EdgeOperators ops;
  ops.length = edge.length;
  const EdgeTrace minus = edge_trace_eval(space, edge_id, Side::minus, rule);
  ops.jxw = minus.jxw;
  if (edge.is_boundary()) {
    ops.dofs = dofs_of(space, minus.element);
    ops.jump = -minus.dn;
    ops.average = minus.dnn;
    return ops;
  }
  const EdgeTrace plus = edge_trace_eval(space, edge_id, Side::plus, rule);
  ops.dofs = dofs_of(space, minus.element);
  const auto plus_dofs = dofs_of(space, plus.element);
  ops.dofs.insert(ops.dofs.end(), plus_dofs.begin(), plus_dofs.end());
  const auto nq = minus.dn.rows();
  ops.jump.resize(nq, 2 * nd);
  ops.average.resize(nq, 2 * nd);
  ops.jump << -minus.dn, plus.dn;
  ops.average << 0.5 * minus.dnn, 0.5 * plus.dnn;
  return ops;
}

inline bool edge_in_form(const Edge& edge, const PenaltyConfig& pen) {
  return !edge.is_boundary() || pen.include_boundary_edges;
}

}  // namespace detail

/// Weighted mass matrix (w phi_j, phi_i); `weight` holds one value per
/// history point (element-major) or is empty for w = 1.
inline SparseOperator assemble_mass(const FESpace& space, const std::vector<double>& weight = {}) {
  const ReferenceTable table(space.element(), element_rule(space));
  const auto nq = table.values.rows();
  if (!weight.empty() && weight.size() != static_cast<std::size_t>(space.n_elements() * nq))
    throw std::invalid_argument("assemble_mass: weight size mismatch");
  CooAssembler coo(space.n_dofs(), space.n_dofs());
  coo.reserve(static_cast<std::size_t>(space.n_elements()) * space.dofs_per_element() * space.dofs_per_element());
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    Eigen::VectorXd w = ev.jxw;
    if (!weight.empty())
      for (Eigen::Index q = 0; q < nq; ++q) w[q] *= weight[static_cast<std::size_t>(t * nq + q)];
    const Eigen::MatrixXd local = ev.values.transpose() * w.asDiagonal() * ev.values;
    const auto dofs = detail::dofs_of(space, t);
    coo.add_block(dofs, dofs, local);
  }
  return coo.consolidate();
}

/// (grad phi_j, grad phi_i)
inline SparseOperator assemble_laplace(const FESpace& space) {
  const ReferenceTable table(space.element(), element_rule(space));
  CooAssembler coo(space.n_dofs(), space.n_dofs());
  coo.reserve(static_cast<std::size_t>(space.n_elements()) * space.dofs_per_element() * space.dofs_per_element());
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const Eigen::MatrixXd local =
        ev.dx.transpose() * ev.jxw.asDiagonal() * ev.dx + ev.dy.transpose() * ev.jxw.asDiagonal() * ev.dy;
    const auto dofs = detail::dofs_of(space, t);
    coo.add_block(dofs, dofs, local);
  }
  return coo.consolidate();
}

/// Matrix of the interior-penalty Hessian form B.
inline SparseOperator assemble_ip_form(const FESpace& space, const PenaltyConfig& pen, const IpTerms& terms = {}) {
  if (space.degree() < 2) throw std::invalid_argument("assemble_ip_form: requires degree >= 2");
  if (!(pen.gamma > 0.0)) throw std::invalid_argument("assemble_ip_form: gamma must be positive");
  CooAssembler coo(space.n_dofs(), space.n_dofs());
  const int nd = space.dofs_per_element();
  coo.reserve(static_cast<std::size_t>(space.n_elements()) * nd * nd * 7);

  if (terms.element) {
    const ReferenceTable table(space.element(), element_rule(space));
    for (int t = 0; t < space.n_elements(); ++t) {
      const BasisEval ev = physical_eval(space, t, table);
      const auto W = ev.jxw.asDiagonal();
      const Eigen::MatrixXd local = ev.dxx.transpose() * W * ev.dxx + 2.0 * (ev.dxy.transpose() * W * ev.dxy) +
                                    ev.dyy.transpose() * W * ev.dyy;
      const auto dofs = detail::dofs_of(space, t);
      coo.add_block(dofs, dofs, local);
    }
  }

  if (terms.consistency || terms.penalty) {
    const QuadratureRule rule = edge_rule(space);
    const auto& edges = space.topology().edges;
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      if (!detail::edge_in_form(edges[e], pen)) continue;
      const auto ops = detail::edge_operators(space, e, rule);
      const auto W = ops.jxw.asDiagonal();
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(ops.jump.cols(), ops.jump.cols());
      if (terms.consistency) {
        const Eigen::MatrixXd cross = ops.jump.transpose() * W * ops.average;
        local += cross + cross.transpose();
      }
      if (terms.penalty) local += (pen.gamma / ops.length) * (ops.jump.transpose() * W * ops.jump);
      coo.add_block(ops.dofs, ops.dofs, local);
    }
  }
  return coo.consolidate();
}

/// B(d, phi_i) for every test function, evaluated edge by edge from the
/// traces of d rather than through the assembled matrix.
inline Eigen::VectorXd apply_ip_form(const FESpace& space, const Eigen::VectorXd& d, const PenaltyConfig& pen) {
  if (space.degree() < 2) throw std::invalid_argument("apply_ip_form: requires degree >= 2");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.n_dofs());
  const ReferenceTable table(space.element(), element_rule(space));
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const auto dofs = detail::dofs_of(space, t);
    const Eigen::VectorXd c = detail::gather(d, dofs);
    const Eigen::VectorXd hxx = ev.jxw.cwiseProduct(ev.dxx * c);
    const Eigen::VectorXd hxy = ev.jxw.cwiseProduct(ev.dxy * c);
    const Eigen::VectorXd hyy = ev.jxw.cwiseProduct(ev.dyy * c);
    detail::scatter_add(out, dofs,
                        ev.dxx.transpose() * hxx + 2.0 * (ev.dxy.transpose() * hxy) + ev.dyy.transpose() * hyy);
  }
  const QuadratureRule rule = edge_rule(space);
  const auto& edges = space.topology().edges;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (!detail::edge_in_form(edges[e], pen)) continue;
    const auto ops = detail::edge_operators(space, e, rule);
    const Eigen::VectorXd c = detail::gather(d, ops.dofs);
    const Eigen::VectorXd jump = ops.jump * c;
    const Eigen::VectorXd avg = ops.average * c;
    Eigen::VectorXd local = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ops.dofs.size()));
    for (Eigen::Index q = 0; q < jump.size(); ++q) {
      const double w = ops.jxw[q];
      local += w * (avg[q] * ops.jump.row(q).transpose() + jump[q] * ops.average.row(q).transpose() +
                    (pen.gamma / ops.length) * jump[q] * ops.jump.row(q).transpose());
    }
    detail::scatter_add(out, ops.dofs, local);
  }
  return out;
}

/// Phase-field Jacobian
///   A = (2H phi, phi) + Gc/(2 l0) (phi, phi) + Gc l0 (grad phi, grad phi)
///       + Gc l0^3/16 B(phi, phi).
inline SparseOperator assemble_phasefield_jacobian(const FESpace& space, const HistoryField& H,
                                                   const MaterialParams& m, const PenaltyConfig& pen) {
  detail::check_history(space, H);
  std::vector<double> weight(H.values.size());
  for (std::size_t k = 0; k < weight.size(); ++k) {
    if (H.values[k] < 0.0) throw std::invalid_argument("assemble_phasefield_jacobian: negative history value");
    weight[k] = 2.0 * H.values[k] + m.Gc / (2.0 * m.l0);
  }
  SparseOperator A = assemble_mass(space, weight);
  A += (m.Gc * m.l0) * assemble_laplace(space);
  A += (m.Gc * m.l0 * m.l0 * m.l0 / 16.0) * assemble_ip_form(space, pen);
  A.prune(0.0);
  A.makeCompressed();
  return A;
}

/// Right-hand side 2 (H, phi_i) of the phase-field solve.
inline Eigen::VectorXd phasefield_load(const FESpace& space, const HistoryField& H) {
  detail::check_history(space, H);
  const ReferenceTable table(space.element(), element_rule(space));
  const auto nq = table.values.rows();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.n_dofs());
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    Eigen::VectorXd w(nq);
    for (Eigen::Index q = 0; q < nq; ++q) w[q] = 2.0 * H.at(t, static_cast<int>(q)) * ev.jxw[q];
    detail::scatter_add(b, detail::dofs_of(space, t), ev.values.transpose() * w);
  }
  return b;
}

/// R1 = 2((1-d)H, phi) - Gc/(2 l0)(d, phi) - Gc l0 (grad d, grad phi)
///      - Gc l0^3/16 B(d, phi), evaluated pointwise from d.
inline Eigen::VectorXd phase_residual(const FESpace& space, const Eigen::VectorXd& d, const HistoryField& H,
                                      const MaterialParams& m, const PenaltyConfig& pen) {
  if (d.size() != space.n_dofs()) throw std::invalid_argument("phase_residual: d has wrong size");
  detail::check_history(space, H);
  const ReferenceTable table(space.element(), element_rule(space));
  const auto nq = table.values.rows();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.n_dofs());
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const auto dofs = detail::dofs_of(space, t);
    const Eigen::VectorXd c = detail::gather(d, dofs);
    const Eigen::VectorXd dq = ev.values * c;
    const Eigen::VectorXd gx = ev.dx * c;
    const Eigen::VectorXd gy = ev.dy * c;
    Eigen::VectorXd wv(nq), wx(nq), wy(nq);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const double h = H.at(t, static_cast<int>(q));
      wv[q] = ev.jxw[q] * (2.0 * (1.0 - dq[q]) * h - m.Gc / (2.0 * m.l0) * dq[q]);
      wx[q] = -ev.jxw[q] * m.Gc * m.l0 * gx[q];
      wy[q] = -ev.jxw[q] * m.Gc * m.l0 * gy[q];
    }
    detail::scatter_add(r, dofs, ev.values.transpose() * wv + ev.dx.transpose() * wx + ev.dy.transpose() * wy);
  }
  r -= (m.Gc * m.l0 * m.l0 * m.l0 / 16.0) * apply_ip_form(space, d, pen);
  return r;
}

/// Symmetric strain of the interleaved displacement at point q of an element.
inline Tensor2 strain_at(const BasisEval& ev, const Eigen::VectorXd& u_local, Eigen::Index q) {
  double exx = 0.0, eyy = 0.0, exy = 0.0;
  for (Eigen::Index i = 0; i < ev.n_dofs(); ++i) {
    const double ux = u_local[2 * i], uy = u_local[2 * i + 1];
    exx += ux * ev.dx(q, i);
    eyy += uy * ev.dy(q, i);
    exy += 0.5 * (ux * ev.dy(q, i) + uy * ev.dx(q, i));
  }
  Tensor2 eps;
  eps << exx, exy, exy, eyy;
  return eps;
}

/// sum_tau (sigma'(d) : eps(u), eps(v)) with the degraded isotropic tangent.
inline SparseOperator assemble_elastic_stiffness(const FESpace& space, const Eigen::VectorXd& d,
                                                 const MaterialParams& m) {
  if (d.size() != space.n_dofs()) throw std::invalid_argument("assemble_elastic_stiffness: d has wrong size");
  const ReferenceTable table(space.element(), element_rule(space));
  const int nd = space.dofs_per_element();
  const auto nq = table.values.rows();
  CooAssembler coo(2 * space.n_dofs(), 2 * space.n_dofs());
  coo.reserve(static_cast<std::size_t>(space.n_elements()) * 4 * nd * nd);
  const double l2m = m.lambda + 2.0 * m.mu;
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const auto sdofs = detail::dofs_of(space, t);
    const Eigen::VectorXd dq = ev.values * detail::gather(d, sdofs);
    Eigen::VectorXd w(nq);
    for (Eigen::Index q = 0; q < nq; ++q) w[q] = ev.jxw[q] * degradation(dq[q], m);
    const auto W = w.asDiagonal();
    const Eigen::MatrixXd xx = ev.dx.transpose() * W * ev.dx;
    const Eigen::MatrixXd yy = ev.dy.transpose() * W * ev.dy;
    const Eigen::MatrixXd xy = ev.dx.transpose() * W * ev.dy;  // (i, j) -> phi_i,x phi_j,y
    Eigen::MatrixXd local(2 * nd, 2 * nd);
    for (int i = 0; i < nd; ++i) {
      for (int j = 0; j < nd; ++j) {
        local(2 * i, 2 * j) = l2m * xx(i, j) + m.mu * yy(i, j);
        local(2 * i, 2 * j + 1) = m.lambda * xy(i, j) + m.mu * xy(j, i);
        local(2 * i + 1, 2 * j) = m.lambda * xy(j, i) + m.mu * xy(i, j);
        local(2 * i + 1, 2 * j + 1) = l2m * yy(i, j) + m.mu * xx(i, j);
      }
    }
    const auto vdofs = detail::vector_dofs_of(space, t);
    coo.add_block(vdofs, vdofs, local);
  }
  return coo.consolidate();
}

/// Body force f and boundary traction g on edges whose tag intersects
/// `traction_markers`. Empty functions mean zero.
struct Loads {
  std::function<Eigen::Vector2d(const Point&)> body_force;
  std::function<Eigen::Vector2d(const Point&)> traction;
  MarkerSet traction_markers = 0;
};

/// (f, v) + <g, v> over the traction edges.
inline Eigen::VectorXd external_load(const FESpace& space, const Loads& loads) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(2 * space.n_dofs());
  if (loads.body_force) {
    const ReferenceTable table(space.element(), element_rule(space));
    for (int t = 0; t < space.n_elements(); ++t) {
      const BasisEval ev = physical_eval(space, t, table);
      const auto vdofs = detail::vector_dofs_of(space, t);
      Eigen::VectorXd local = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vdofs.size()));
      for (Eigen::Index q = 0; q < ev.n_points(); ++q) {
        const Eigen::Vector2d f = loads.body_force(ev.points[q]);
        for (Eigen::Index i = 0; i < ev.n_dofs(); ++i) {
          local[2 * i] += ev.jxw[q] * f.x() * ev.values(q, i);
          local[2 * i + 1] += ev.jxw[q] * f.y() * ev.values(q, i);
        }
      }
      detail::scatter_add(F, vdofs, local);
    }
  }
  if (loads.traction && loads.traction_markers != 0) {
    const QuadratureRule rule = edge_rule(space);
    for (int e : space.topology().boundary_edge_ids) {
      if ((space.topology().edges[e].marker & loads.traction_markers) == 0) continue;
      const EdgeTrace tr = edge_trace_eval(space, e, Side::minus, rule);
      const auto vdofs = detail::vector_dofs_of(space, tr.element);
      Eigen::VectorXd local = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vdofs.size()));
      for (Eigen::Index q = 0; q < tr.values.rows(); ++q) {
        const Eigen::Vector2d g = loads.traction(tr.points[q]);
        for (Eigen::Index i = 0; i < tr.values.cols(); ++i) {
          local[2 * i] += tr.jxw[q] * g.x() * tr.values(q, i);
          local[2 * i + 1] += tr.jxw[q] * g.y() * tr.values(q, i);
        }
      }
      detail::scatter_add(F, vdofs, local);
    }
  }
  return F;
}

/// R0 = -(sigma(u, d), eps(v)) + (f, v) + <g, v>, evaluated from stresses.
inline Eigen::VectorXd elastic_residual(const FESpace& space, const Eigen::VectorXd& u, const Eigen::VectorXd& d,
                                        const MaterialParams& m, const Loads& loads = {}) {
  if (u.size() != 2 * space.n_dofs() || d.size() != space.n_dofs())
    throw std::invalid_argument("elastic_residual: field size mismatch");
  Eigen::VectorXd R = external_load(space, loads);
  const ReferenceTable table(space.element(), element_rule(space));
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const auto vdofs = detail::vector_dofs_of(space, t);
    const Eigen::VectorXd ul = detail::gather(u, vdofs);
    const Eigen::VectorXd dq = ev.values * detail::gather(d, detail::dofs_of(space, t));
    Eigen::VectorXd local = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vdofs.size()));
    for (Eigen::Index q = 0; q < ev.n_points(); ++q) {
      const Tensor2 s = degraded_stress(strain_at(ev, ul, q), dq[q], m);
      for (Eigen::Index i = 0; i < ev.n_dofs(); ++i) {
        local[2 * i] -= ev.jxw[q] * (s(0, 0) * ev.dx(q, i) + s(0, 1) * ev.dy(q, i));
        local[2 * i + 1] -= ev.jxw[q] * (s(1, 0) * ev.dx(q, i) + s(1, 1) * ev.dy(q, i));
      }
    }
    detail::scatter_add(R, vdofs, local);
  }
  return R;
}

/// Net reaction through the constrained dofs: sum_i (K u - F)_i.
inline double reaction_force(const SparseOperator& K, const Eigen::VectorXd& u, const Eigen::VectorXd& F,
                             const std::vector<int>& constrained) {
  if (constrained.empty()) throw std::invalid_argument("reaction_force: empty constrained dof set");
  const Eigen::VectorXd r = K * u - F;
  double sum = 0.0;
  for (int i : constrained) sum += r[i];
  return sum;
}

/// Updates H <- max(H, e_s^+(eps(u))) at every history point.
inline void update_history_field(const FESpace& space, const Eigen::VectorXd& u, const MaterialParams& m,
                                 HistoryField& H) {
  detail::check_history(space, H);
  const ReferenceTable table(space.element(), element_rule(space));
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const Eigen::VectorXd ul = detail::gather(u, detail::vector_dofs_of(space, t));
    for (Eigen::Index q = 0; q < ev.n_points(); ++q) {
      double& h = H.at(t, static_cast<int>(q));
      h = update_history(h, strain_at(ev, ul, q), m);
    }
  }
}

/// int g(d) e_s(eps(u))
inline double elastic_energy(const FESpace& space, const Eigen::VectorXd& u, const Eigen::VectorXd& d,
                             const MaterialParams& m) {
  const ReferenceTable table(space.element(), element_rule(space));
  double energy = 0.0;
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const Eigen::VectorXd ul = detail::gather(u, detail::vector_dofs_of(space, t));
    const Eigen::VectorXd dq = ev.values * detail::gather(d, detail::dofs_of(space, t));
    for (Eigen::Index q = 0; q < ev.n_points(); ++q)
      energy += ev.jxw[q] * degradation(dq[q], m) * total_energy(strain_at(ev, ul, q), m);
  }
  return energy;
}

/// Gc int [ d^2/(4 l0) + l0/2 |grad d|^2 + l0^3/32 D2d : D2d ], Hessian taken
/// element by element.
inline double surface_energy(const FESpace& space, const Eigen::VectorXd& d, const MaterialParams& m) {
  const ReferenceTable table(space.element(), element_rule(space));
  const double l0 = m.l0;
  double energy = 0.0;
  for (int t = 0; t < space.n_elements(); ++t) {
    const BasisEval ev = physical_eval(space, t, table);
    const Eigen::VectorXd c = detail::gather(d, detail::dofs_of(space, t));
    const Eigen::VectorXd v = ev.values * c, gx = ev.dx * c, gy = ev.dy * c;
    const Eigen::VectorXd hxx = ev.dxx * c, hxy = ev.dxy * c, hyy = ev.dyy * c;
    for (Eigen::Index q = 0; q < ev.n_points(); ++q) {
      const double density = v[q] * v[q] / (4.0 * l0) + 0.5 * l0 * (gx[q] * gx[q] + gy[q] * gy[q]) +
                             l0 * l0 * l0 / 32.0 * (hxx[q] * hxx[q] + 2.0 * hxy[q] * hxy[q] + hyy[q] * hyy[q]);
      energy += ev.jxw[q] * density;
    }
  }
  return m.Gc * energy;
}

/// The cross blocks dR0/dd and dR1/du of the coupled Newton system are not
/// assembled: displacement and phase field are solved alternately with
/// these blocks dropped.
[[noreturn]] inline SparseOperator assemble_coupling_block(const FESpace&) {
  throw std::logic_error("assemble_coupling_block: unused under the staggered scheme");
}

}  // namespace pffrac
