#pragma once

// Isotropic linear elasticity with the hybrid split: the stress is degraded
// isotropically by g(d) = (1-d)^2 + k_res, while only the tensile (spectral
// positive) strain energy drives the phase field through the history field.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace pffrac {

using Tensor2 = Eigen::Matrix2d;

enum class PlaneAssumption { plane_strain, plane_stress };

struct MaterialParams {
  double E = 200.0;    // kN/mm^2
  double nu = 0.2;
  double lambda = 0.0;  // kN/mm^2
  double mu = 0.0;      // kN/mm^2
  double Gc = 1.0;      // kN/mm
  double l0 = 0.02;     // mm
  double k_res = 1e-6;
  PlaneAssumption plane = PlaneAssumption::plane_strain;
};

inline std::pair<double, double> lame_from_E_nu(double E, double nu, PlaneAssumption plane) {
  if (!(E > 0.0)) throw std::invalid_argument("lame_from_E_nu: E must be positive");
  if (!(nu > -1.0 && nu <= 0.5)) throw std::invalid_argument("lame_from_E_nu: nu must lie in (-1, 0.5)");
  if (plane == PlaneAssumption::plane_strain && nu == 0.5)
    throw std::invalid_argument("lame_from_E_nu: nu = 0.5 is incompressible under plane strain");
  const double mu = E / (2.0 * (1.0 + nu));
  const double lambda = plane == PlaneAssumption::plane_strain ? E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
                                                               : E * nu / (1.0 - nu * nu);
  return {lambda, mu};
}

/// Fills in lambda and mu from (E, nu, plane) and checks the remaining
/// constants.
inline MaterialParams make_material(double E, double nu, double Gc, double l0, double k_res = 1e-6,
                                    PlaneAssumption plane = PlaneAssumption::plane_strain) {
  MaterialParams m;
  m.E = E;
  m.nu = nu;
  m.Gc = Gc;
  m.l0 = l0;
  m.k_res = k_res;
  m.plane = plane;
  std::tie(m.lambda, m.mu) = lame_from_E_nu(E, nu, plane);
  if (Gc < 0.0) throw std::invalid_argument("material: Gc must be non-negative");
  if (!(l0 > 0.0)) throw std::invalid_argument("material: l0 must be positive");
  if (!(k_res >= 0.0 && k_res < 1.0)) throw std::invalid_argument("material: k_res must lie in [0, 1)");
  return m;
}

enum class Bracket { plus, minus };

/// <x>_+ = (x + |x|)/2, <x>_- = (x - |x|)/2
inline double macaulay(double x, Bracket sign) {
  return sign == Bracket::plus ? 0.5 * (x + std::abs(x)) : 0.5 * (x - std::abs(x));
}

struct SpectralSplit {
  Tensor2 plus = Tensor2::Zero();
  Tensor2 minus = Tensor2::Zero();
};

/// Eigenvalues of a symmetric 2x2 tensor, larger first.
inline std::pair<double, double> principal_values(const Tensor2& eps) {
  const double mean = 0.5 * (eps(0, 0) + eps(1, 1));
  const double half_diff = 0.5 * (eps(0, 0) - eps(1, 1));
  const double off = 0.5 * (eps(0, 1) + eps(1, 0));
  const double radius = std::hypot(half_diff, off);
  return {mean + radius, mean - radius};
}

/// eps = eps_plus + eps_minus with eps_plus >= 0 and eps_minus <= 0.
/// When both eigenvalues share a sign the split is trivial; otherwise they
/// are separated by at least the larger magnitude and the spectral projector
/// (eps - l2 I)/(l1 - l2) is well conditioned. Ties therefore never reach
/// the projector.
inline SpectralSplit spectral_split(const Tensor2& strain) {
  const Tensor2 eps = 0.5 * (strain + strain.transpose());
  const auto [l1, l2] = principal_values(eps);
  SpectralSplit s;
  if (l2 >= 0.0) {
    s.plus = eps;
  } else if (l1 <= 0.0) {
    s.minus = eps;
  } else {
    const Tensor2 p1 = (eps - l2 * Tensor2::Identity()) / (l1 - l2);
    s.plus = l1 * p1;
    s.minus = eps - s.plus;
  }
  return s;
}

/// Tensile energy density (lambda/2)<tr eps>_+^2 + mu tr(eps_+^2).
inline double positive_energy(const Tensor2& strain, const MaterialParams& m) {
  const auto [l1, l2] = principal_values(strain);
  const double tr = macaulay(strain.trace(), Bracket::plus);
  const double p1 = macaulay(l1, Bracket::plus);
  const double p2 = macaulay(l2, Bracket::plus);
  return 0.5 * m.lambda * tr * tr + m.mu * (p1 * p1 + p2 * p2);
}

/// (lambda/2) tr(eps)^2 + mu eps:eps
inline double total_energy(const Tensor2& strain, const MaterialParams& m) {
  const double tr = strain.trace();
  return 0.5 * m.lambda * tr * tr + m.mu * strain.squaredNorm();
}

/// g(d) = (1 - d)^2 + k_res with d clamped to [0, 1].
inline double degradation(double d, const MaterialParams& m) {
  const double dc = std::clamp(d, 0.0, 1.0);
  return (1.0 - dc) * (1.0 - dc) + m.k_res;
}

inline Tensor2 degraded_stress(const Tensor2& strain, double d, const MaterialParams& m) {
  const Tensor2 eps = 0.5 * (strain + strain.transpose());
  return degradation(d, m) * (m.lambda * eps.trace() * Tensor2::Identity() + 2.0 * m.mu * eps);
}

inline double update_history(double h_old, const Tensor2& strain, const MaterialParams& m) {
  if (h_old < 0.0) throw std::invalid_argument("update_history: negative history value");
  return std::max(h_old, positive_energy(strain, m));
}

/// Per-(element, quadrature point) storage, element-major.
struct HistoryField {
  int points_per_element = 0;
  std::vector<double> values;

  [[nodiscard]] double& at(int elem, int q) {
    return values[static_cast<std::size_t>(elem) * points_per_element + q];
  }
  [[nodiscard]] double at(int elem, int q) const {
    return values[static_cast<std::size_t>(elem) * points_per_element + q];
  }
};

struct FieldState {
  Eigen::VectorXd u;  // interleaved (ux, uy) per scalar dof
  Eigen::VectorXd d;
  HistoryField H;
};

}  // namespace pffrac
