#pragma once

#include <random>

#include <pffrac/pffrac.hpp>

namespace pffrac::testing {

// Unit-square grid with interior nodes displaced by up to `amount` cells.
inline Mesh jittered_grid(int n, unsigned seed, double amount = 0.2) {
  Mesh m = build_rect_mesh(n, n);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-amount / n, amount / n);
  for (std::size_t v = 0; v < m.n_nodes(); ++v)
    if (m.markers[v] == 0) m.nodes[v] += Point(dist(rng), dist(rng));
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline HistoryField random_history(const FESpace& space, std::mt19937& rng, double hi = 5.0) {
  HistoryField H = make_history(space);
  std::uniform_real_distribution<double> dist(0.0, hi);
  for (auto& h : H.values) h = dist(rng);
  return H;
}

// Interleaved displacement interpolating a vector field.
template <class F>
Eigen::VectorXd interpolate_vector(const FESpace& space, F&& f) {
  Eigen::VectorXd u(2 * space.n_dofs());
  for (int i = 0; i < space.n_dofs(); ++i) {
    const Eigen::Vector2d v = f(space.dof_coordinates()[i]);
    u[2 * i] = v.x();
    u[2 * i + 1] = v.y();
  }
  return u;
}

}  // namespace pffrac::testing
