#pragma once

// Load-displacement CSV and legacy ASCII VTK snapshots. Degree-p triangles
// are written as p^2 linear sub-triangles whose vertices are the Lagrange
// nodes.

#include <ostream>
#include <stdexcept>
#include <vector>

#include "fespace.hpp"
#include "material.hpp"
#include "solver.hpp"

namespace pffrac {

inline constexpr const char* curve_csv_header =
    "step,applied_uy_mm,reaction_kN,max_d,elastic_energy,surface_energy,stagger_iters,converged";

inline void write_curve_csv(const std::vector<CurveRecord>& records, std::ostream& out) {
  if (records.empty()) throw std::invalid_argument("write_curve_csv: no records");
  const auto old_prec = out.precision(15);
  out << curve_csv_header << '\n';
  for (const auto& r : records) {
    out << r.step << ',' << r.applied_uy_mm << ',' << r.reaction_kN << ',' << r.max_d << ',' << r.elastic_energy << ','
        << r.surface_energy << ',' << r.stagger_iters << ',' << (r.converged ? "true" : "false") << '\n';
  }
  out.precision(old_prec);
}

/// Linear sub-triangles of the reference lattice as local dof triples.
inline std::vector<std::array<int, 3>> sub_triangles(const LagrangeTriangle& fe) {
  const int p = fe.degree();
  std::vector<std::array<int, 3>> cells;
  for (int b = 0; b < p; ++b) {
    for (int a = 0; a + b < p; ++a) {
      cells.push_back({fe.local_index(a, b), fe.local_index(a + 1, b), fe.local_index(a, b + 1)});
      if (a + b < p - 1) cells.push_back({fe.local_index(a + 1, b), fe.local_index(a + 1, b + 1), fe.local_index(a, b + 1)});
    }
  }
  return cells;
}

inline void write_vtk_snapshot(const FESpace& space, const FieldState& state, std::ostream& out) {
  if (state.d.size() != space.n_dofs() || state.u.size() != 2 * space.n_dofs())
    throw std::invalid_argument("write_vtk_snapshot: state does not match the space");
  const auto old_prec = out.precision(17);
  const auto& coords = space.dof_coordinates();
  const auto cells = sub_triangles(space.element());
  const std::size_t n_cells = cells.size() * static_cast<std::size_t>(space.n_elements());

  out << "# vtk DataFile Version 3.0\n"
      << "phase-field fracture snapshot\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << coords.size() << " double\n";
  for (const auto& x : coords) out << x.x() << ' ' << x.y() << " 0\n";

  out << "CELLS " << n_cells << ' ' << 4 * n_cells << '\n';
  for (int t = 0; t < space.n_elements(); ++t) {
    const int* dofs = space.element_dofs(t);
    for (const auto& c : cells) out << "3 " << dofs[c[0]] << ' ' << dofs[c[1]] << ' ' << dofs[c[2]] << '\n';
  }
  out << "CELL_TYPES " << n_cells << '\n';
  for (std::size_t k = 0; k < n_cells; ++k) out << "5\n";

  out << "POINT_DATA " << coords.size() << '\n' << "SCALARS d double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < state.d.size(); ++i) out << state.d[i] << '\n';
  out << "VECTORS displacement double\n";
  for (Eigen::Index i = 0; i < state.d.size(); ++i) out << state.u[2 * i] << ' ' << state.u[2 * i + 1] << " 0\n";
  out.precision(old_prec);
}

}  // namespace pffrac
