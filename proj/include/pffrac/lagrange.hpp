#pragma once

// Equispaced Lagrange basis of degree p on the reference triangle with
// vertices (0,0), (1,0), (0,1). Each basis function is a product of three
// univariate factors in the barycentric coordinates
//   l0 = 1 - x - y,  l1 = x,  l2 = y,
// so values, gradients and Hessians follow from the product rule.
//
// Local ordering: vertices 0,1,2; then the p-1 nodes of each local edge k
// (joining vertex k to vertex k+1 mod 3) in the direction of the edge; then
// interior nodes row by row.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pffrac {

inline constexpr int max_degree = 4;

/// Symmetric 2x2 second derivatives stored as (xx, xy, yy).
using Hessian = Eigen::Vector3d;

struct LatticeIndex {
  int a = 0;  // steps along x
  int b = 0;  // steps along y
};

class LagrangeTriangle {
 public:
  explicit LagrangeTriangle(int degree) : p_(degree) {
    if (degree < 1 || degree > max_degree)
      throw std::invalid_argument("LagrangeTriangle: unsupported degree " + std::to_string(degree));
    nodes_.push_back({0, 0});
    nodes_.push_back({p_, 0});
    nodes_.push_back({0, p_});
    for (int t = 1; t < p_; ++t) nodes_.push_back({t, 0});
    for (int t = 1; t < p_; ++t) nodes_.push_back({p_ - t, t});
    for (int t = 1; t < p_; ++t) nodes_.push_back({0, p_ - t});
    for (int b = 1; b < p_; ++b)
      for (int a = 1; a + b < p_; ++a) nodes_.push_back({a, b});
  }

  [[nodiscard]] int degree() const { return p_; }
  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] int n_edge_dofs() const { return p_ - 1; }
  [[nodiscard]] int n_interior_dofs() const { return (p_ - 1) * (p_ - 2) / 2; }
  [[nodiscard]] const std::vector<LatticeIndex>& lattice() const { return nodes_; }

  [[nodiscard]] Eigen::Vector2d node(int i) const {
    return {static_cast<double>(nodes_[i].a) / p_, static_cast<double>(nodes_[i].b) / p_};
  }

  /// Local index of lattice node (a, b); -1 if outside the triangle.
  [[nodiscard]] int local_index(int a, int b) const {
    for (int i = 0; i < size(); ++i)
      if (nodes_[i].a == a && nodes_[i].b == b) return i;
    return -1;
  }

  /// Evaluates all basis functions at `xi`. Any output pointer may be null.
  void evaluate(const Eigen::Vector2d& xi, double* values, Eigen::Vector2d* gradients, Hessian* hessians) const {
    const std::array<double, 3> lambda{1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
    static const std::array<Eigen::Vector2d, 3> dlambda{Eigen::Vector2d{-1.0, -1.0}, Eigen::Vector2d{1.0, 0.0},
                                                        Eigen::Vector2d{0.0, 1.0}};

    // r[k][m] = (value, first, second derivative) of the univariate factor of
    // order m in barycentric coordinate k.
    std::array<std::array<Eigen::Vector3d, max_degree + 1>, 3> r;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d f{1.0, 0.0, 0.0};
      r[k][0] = f;
      for (int m = 1; m <= p_; ++m) {
        const double q = m - 1;
        const double s = (p_ * lambda[k] - q) / (q + 1.0);
        const double ds = p_ / (q + 1.0);
        f = Eigen::Vector3d{f[0] * s, f[1] * s + f[0] * ds, f[2] * s + 2.0 * f[1] * ds};
        r[k][m] = f;
      }
    }

    for (int i = 0; i < size(); ++i) {
      const std::array<int, 3> order{p_ - nodes_[i].a - nodes_[i].b, nodes_[i].a, nodes_[i].b};
      const std::array<Eigen::Vector3d, 3> fac{r[0][order[0]], r[1][order[1]], r[2][order[2]]};
      if (values) values[i] = fac[0][0] * fac[1][0] * fac[2][0];
      if (!gradients && !hessians) continue;

      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
      for (int k = 0; k < 3; ++k) {
        const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
        const double others = fac[k1][0] * fac[k2][0];
        g += fac[k][1] * others * dlambda[k];
        h += fac[k][2] * others * dlambda[k] * dlambda[k].transpose();
        for (int l = 0; l < 3; ++l) {
          if (l == k) continue;
          const int rest = 3 - k - l;
          h += fac[k][1] * fac[l][1] * fac[rest][0] * dlambda[k] * dlambda[l].transpose();
        }
      }
      if (gradients) gradients[i] = g;
      if (hessians) hessians[i] = Hessian{h(0, 0), h(0, 1), h(1, 1)};
    }
  }

 private:
  int p_;
  std::vector<LatticeIndex> nodes_;
};

}  // namespace pffrac
