#pragma once

// Gauss-Legendre rules on [-1, 1] and collapsed (Duffy) product rules on the
// reference triangle {(x, y) : x, y >= 0, x + y <= 1}.

#include <cmath>
#include <numbers>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pffrac {

struct QuadratureRule {
  std::vector<Eigen::Vector2d> points;  // reference coordinates; edges use x only
  std::vector<double> weights;
  int exactness = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre abscissae and weights on [-1, 1] by Newton iteration
/// on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  // returns P_n(z) and P_n'(z) by the three-term recurrence
  auto legendre = [n](double z) {
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    return std::pair{p1, n * (z * p1 - p0) / (z * z - 1.0)};
  };
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(z);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double dp = legendre(z).second;
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

inline constexpr int max_quadrature_degree = 10;

/// Rule on [-1, 1] exact for polynomials of degree <= `degree`.
inline QuadratureRule edge_quadrature(int degree) {
  if (degree < 0 || degree > max_quadrature_degree)
    throw std::invalid_argument("edge_quadrature: unsupported exactness degree " + std::to_string(degree));
  const int n = degree / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.exactness = degree;
  for (int i = 0; i < n; ++i) {
    rule.points.emplace_back(x[i], 0.0);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

/// Rule on the reference triangle exact for total degree <= `degree`.
/// The collapsed map x = u(1 - v), y = v carries a Jacobian (1 - v), so the v
/// direction needs one extra degree of exactness.
inline QuadratureRule triangle_quadrature(int degree) {
  if (degree < 0 || degree > max_quadrature_degree)
    throw std::invalid_argument("triangle_quadrature: unsupported exactness degree " + std::to_string(degree));
  const int nu = degree / 2 + 1;
  const int nv = (degree + 1) / 2 + 1;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);
  QuadratureRule rule;
  rule.exactness = degree;
  for (int j = 0; j < nv; ++j) {
    const double v = 0.5 * (xv[j] + 1.0);
    for (int i = 0; i < nu; ++i) {
      const double u = 0.5 * (xu[i] + 1.0);
      rule.points.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(0.25 * wu[i] * wv[j] * (1.0 - v));
    }
  }
  return rule;
}

}  // namespace pffrac
