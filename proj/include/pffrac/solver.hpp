#pragma once

// Dirichlet elimination, sparse Cholesky solves, the staggered
// displacement/phase-field iteration and the displacement-controlled load
// loop.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "assembly.hpp"
#include "fespace.hpp"
#include "material.hpp"

namespace pffrac {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DirichletSpec {
  std::vector<std::pair<int, double>> constraints;

  void add(int dof, double value) { constraints.emplace_back(dof, value); }
  [[nodiscard]] bool empty() const { return constraints.empty(); }

  /// Sorted, de-duplicated constraints; conflicting values throw.
  [[nodiscard]] std::vector<std::pair<int, double>> normalized() const {
    std::map<int, double> seen;
    for (const auto& [dof, value] : constraints) {
      auto [it, inserted] = seen.emplace(dof, value);
      if (!inserted && it->second != value)
        throw std::invalid_argument("DirichletSpec: conflicting values for dof " + std::to_string(dof));
    }
    return {seen.begin(), seen.end()};
  }
};

/// Symmetric elimination: constrained rows and columns are zeroed, the
/// diagonal set to one and known columns moved to the right-hand side.
/// The sparsity pattern is preserved (eliminated entries become explicit
/// zeros) so factorization patterns can be reused across steps.
inline std::pair<SparseOperator, Eigen::VectorXd> apply_dirichlet(SparseOperator A, Eigen::VectorXd b,
                                                                  const DirichletSpec& spec) {
  const auto cons = spec.normalized();
  if (cons.empty()) return {std::move(A), std::move(b)};
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n) throw std::invalid_argument("apply_dirichlet: dimension mismatch");
  std::vector<char> fixed(n, 0);
  Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
  for (const auto& [dof, v] : cons) {
    if (dof < 0 || dof >= n) throw std::invalid_argument("apply_dirichlet: dof " + std::to_string(dof) + " out of range");
    fixed[dof] = 1;
    value[dof] = v;
  }
  A.makeCompressed();
  std::vector<char> has_diag(n, 0);
  for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(A, k); it; ++it) {
      const auto r = it.row(), c = it.col();
      if (fixed[r]) {
        it.valueRef() = r == c ? 1.0 : 0.0;
        if (r == c) has_diag[r] = 1;
      } else if (fixed[c]) {
        b[r] -= it.value() * value[c];
        it.valueRef() = 0.0;
      }
    }
  }
  for (const auto& [dof, v] : cons) {
    if (!has_diag[dof]) A.coeffRef(dof, dof) = 1.0;
    b[dof] = v;
  }
  A.makeCompressed();
  return {std::move(A), std::move(b)};
}

struct SolveReport {
  double relative_residual = 0.0;
};

/// Sparse Cholesky solve; the symbolic analysis is reused while the
/// sparsity pattern is unchanged.
class LinearSolver {
 public:
  /// Backward error ||Ax - b|| / (||A|| ||x|| + ||b||) above which a solve
  /// is reported as failed.
  static constexpr double backward_error_limit = 1e-10;

  Eigen::VectorXd solve(const SparseOperator& A, const Eigen::VectorXd& b, SolveReport* report = nullptr) {
    if (A.rows() != A.cols() || A.rows() != b.size()) throw std::invalid_argument("solve_linear: dimension mismatch");
    if (!A.isCompressed()) throw std::invalid_argument("solve_linear: operator must be consolidated");
    if (!same_pattern(A)) {
      llt_.analyzePattern(A);
      outer_.assign(A.outerIndexPtr(), A.outerIndexPtr() + A.outerSize() + 1);
      inner_.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
    }
    llt_.factorize(A);
    if (llt_.info() != Eigen::Success)
      throw SolverError("sparse Cholesky factorization failed (operator not positive definite), n = " +
                        std::to_string(A.rows()));
    Eigen::VectorXd x = llt_.solve(b);
    const double res = (A * x - b).norm();
    const double bnorm = b.norm();
    const double rel = bnorm > 0.0 ? res / bnorm : res;
    const double backward = res / (max_abs_row_sum(A) * x.norm() + bnorm + std::numeric_limits<double>::min());
    if (!std::isfinite(res) || backward > backward_error_limit) {
      std::ostringstream msg;
      msg << "sparse solve inaccurate: relative residual " << rel << ", backward error " << backward;
      throw SolverError(msg.str());
    }
    if (report) report->relative_residual = rel;
    return x;
  }

 private:
  [[nodiscard]] bool same_pattern(const SparseOperator& A) const {
    return static_cast<std::size_t>(A.outerSize() + 1) == outer_.size() &&
           static_cast<std::size_t>(A.nonZeros()) == inner_.size() &&
           std::equal(outer_.begin(), outer_.end(), A.outerIndexPtr()) &&
           std::equal(inner_.begin(), inner_.end(), A.innerIndexPtr());
  }

  static double max_abs_row_sum(const SparseOperator& A) {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(A.rows());
    for (Eigen::Index k = 0; k < A.outerSize(); ++k)
      for (SparseOperator::InnerIterator it(A, k); it; ++it) sums[it.row()] += std::abs(it.value());
    return sums.size() ? sums.maxCoeff() : 0.0;
  }

  Eigen::SimplicialLLT<SparseOperator> llt_;
  std::vector<int> outer_, inner_;
};

inline Eigen::VectorXd solve_linear(const SparseOperator& A, const Eigen::VectorXd& b, SolveReport* report = nullptr) {
  LinearSolver solver;
  return solver.solve(A, b, report);
}

struct StaggerConfig {
  int max_stagger_iters = 50;
  double stagger_tol = 1e-5;
  double linear_tol = 1e-10;  // unused by the direct solver

  void validate() const {
    if (max_stagger_iters < 1) throw std::invalid_argument("max_stagger_iters must be >= 1");
    if (!(stagger_tol > 0.0) || !(linear_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  }
};

struct LoadPhase {
  int n_steps = 1;
  double delta_uy = 0.0;  // mm per step
};

struct LoadSchedule {
  std::vector<LoadPhase> phases;

  void validate() const {
    if (phases.empty()) throw std::invalid_argument("load schedule is empty");
    for (const auto& ph : phases)
      if (ph.n_steps < 1) throw std::invalid_argument("load schedule phase with fewer than one step");
  }

  /// Applied displacement after each step, accumulated.
  [[nodiscard]] std::vector<double> applied_values() const {
    validate();
    std::vector<double> out;
    double uy = 0.0;
    for (const auto& ph : phases)
      for (int s = 0; s < ph.n_steps; ++s) out.push_back(uy += ph.delta_uy);
    return out;
  }
};

/// 5 steps of 1.4e-2 mm followed by 25 steps of 2.2e-3 mm.
inline LoadSchedule hole_plate_schedule() { return LoadSchedule{{{5, 1.4e-2}, {25, 2.2e-3}}}; }

enum class HoleCondition { rim, center_point };
enum class PhaseSpaceKind { natural, zero_trace };

struct BoundaryOptions {
  bool top_tangential_fixed = true;
  HoleCondition hole = HoleCondition::rim;
  PhaseSpaceKind phase_space = PhaseSpaceKind::natural;
};

/// Vertical displacement dofs on the loaded (top) boundary.
inline std::vector<int> top_vertical_dofs(const FESpace& space) {
  std::vector<int> out;
  const auto& markers = space.dof_markers();
  for (int i = 0; i < space.n_dofs(); ++i)
    if (has(markers[i], Marker::top)) out.push_back(2 * i + 1);
  return out;
}

/// Displacement constraints for an applied top displacement: top u_y = load
/// (u_x = 0 when the grip is fixed) and the hole held fixed, either along
/// the whole rim or at the single rim vertex with the smallest y.
inline DirichletSpec displacement_constraints(const FESpace& space, double load, const BoundaryOptions& opts) {
  DirichletSpec spec;
  const auto& markers = space.dof_markers();
  for (int i = 0; i < space.n_dofs(); ++i) {
    if (has(markers[i], Marker::top)) {
      spec.add(2 * i + 1, load);
      if (opts.top_tangential_fixed) spec.add(2 * i, 0.0);
    }
  }
  if (opts.hole == HoleCondition::rim) {
    for (int i = 0; i < space.n_dofs(); ++i) {
      if (has(markers[i], Marker::hole)) {
        spec.add(2 * i, 0.0);
        spec.add(2 * i + 1, 0.0);
      }
    }
  } else {
    const auto& nodes = space.mesh().nodes;
    int pin = -1;
    for (int v = 0; v < static_cast<int>(nodes.size()); ++v) {
      if (has(space.mesh().markers[v], Marker::hole) && (pin < 0 || nodes[v].y() < nodes[pin].y())) pin = v;
    }
    if (pin >= 0) {
      spec.add(2 * pin, 0.0);
      spec.add(2 * pin + 1, 0.0);
    }
  }
  return spec;
}

inline DirichletSpec phase_constraints(const FESpace& space, const BoundaryOptions& opts) {
  DirichletSpec spec;
  if (opts.phase_space == PhaseSpaceKind::zero_trace) {
    const auto& markers = space.dof_markers();
    for (int i = 0; i < space.n_dofs(); ++i)
      if (markers[i] != 0) spec.add(i, 0.0);
  }
  return spec;
}

struct StepResult {
  int stagger_iters = 0;
  bool converged = false;
  double reaction = 0.0;
};

struct CurveRecord {
  int step = 0;
  double applied_uy_mm = 0.0;
  double reaction_kN = 0.0;
  double max_d = 0.0;
  double elastic_energy = 0.0;
  double surface_energy = 0.0;
  int stagger_iters = 0;
  bool converged = false;
};

struct RunHistory {
  std::vector<CurveRecord> records;
  FieldState final_state;
  bool aborted = false;
  std::string diagnostic;
};

/// Owns the operators that do not change during a run and the factorization
/// caches of the two linear solves.
class StaggeredSolver {
 public:
  StaggeredSolver(const FESpace& space, MaterialParams params, PenaltyConfig penalty, BoundaryOptions bc = {},
                  StaggerConfig stagger = {}, Loads loads = {})
      : space_(space), params_(params), penalty_(penalty), bc_(bc), stagger_(stagger), loads_(std::move(loads)) {
    if (space.degree() < 2) throw std::invalid_argument("phase field requires polynomial degree >= 2");
    stagger_.validate();
    SparseOperator fixed = (params_.Gc / (2.0 * params_.l0)) * assemble_mass(space_);
    fixed += (params_.Gc * params_.l0) * assemble_laplace(space_);
    fixed += (params_.Gc * std::pow(params_.l0, 3) / 16.0) * assemble_ip_form(space_, penalty_);
    phase_fixed_ = std::move(fixed);
    F_ = external_load(space_, loads_);
    top_dofs_ = top_vertical_dofs(space_);
  }

  [[nodiscard]] FieldState initial_state() const { return make_state(space_); }
  [[nodiscard]] const FESpace& space() const { return space_; }

  /// One load step of alternating displacement and phase-field solves.
  StepResult step(FieldState& state, double load) {
    StepResult result;
    const DirichletSpec ucons = displacement_constraints(space_, load, bc_);
    const DirichletSpec dcons = phase_constraints(space_, bc_);
    for (int it = 1; it <= stagger_.max_stagger_iters; ++it) {
      result.stagger_iters = it;
      {
        auto [K, rhs] = apply_dirichlet(assemble_elastic_stiffness(space_, state.d, params_), F_, ucons);
        state.u = elastic_solver_.solve(K, rhs);
      }
      update_history_field(space_, state.u, params_, state.H);

      std::vector<double> weight(state.H.values.size());
      for (std::size_t k = 0; k < weight.size(); ++k) weight[k] = 2.0 * state.H.values[k];
      SparseOperator A = phase_fixed_ + assemble_mass(space_, weight);
      auto [Ad, bd] = apply_dirichlet(std::move(A), phasefield_load(space_, state.H), dcons);
      const Eigen::VectorXd d_new = phase_solver_.solve(Ad, bd);

      const double change = (d_new - state.d).norm() / std::max(d_new.norm(), 1.0);
      state.d = d_new;
      if (change <= stagger_.stagger_tol) {
        result.converged = true;
        break;
      }
    }
    result.reaction = reaction(state);
    return result;
  }

  [[nodiscard]] double reaction(const FieldState& state) const {
    if (top_dofs_.empty()) return 0.0;
    return reaction_force(assemble_elastic_stiffness(space_, state.d, params_), state.u, F_, top_dofs_);
  }

  using StepCallback = std::function<void(const CurveRecord&, const FieldState&)>;

  /// Runs every step of the schedule from the zero state. Solver failures end
  /// the run with a partial history.
  RunHistory run(const LoadSchedule& schedule, const StepCallback& on_step = {}) {
    const auto loads = schedule.applied_values();
    RunHistory hist;
    hist.final_state = initial_state();
    for (std::size_t s = 0; s < loads.size(); ++s) {
      StepResult r;
      try {
        r = step(hist.final_state, loads[s]);
      } catch (const SolverError& e) {
        hist.aborted = true;
        hist.diagnostic = "step " + std::to_string(s + 1) + ": " + e.what();
        break;
      }
      CurveRecord rec;
      rec.step = static_cast<int>(s + 1);
      rec.applied_uy_mm = loads[s];
      rec.reaction_kN = r.reaction;
      rec.max_d = hist.final_state.d.size() ? hist.final_state.d.maxCoeff() : 0.0;
      rec.elastic_energy = elastic_energy(space_, hist.final_state.u, hist.final_state.d, params_);
      rec.surface_energy = surface_energy(space_, hist.final_state.d, params_);
      rec.stagger_iters = r.stagger_iters;
      rec.converged = r.converged;
      hist.records.push_back(rec);
      if (on_step) on_step(rec, hist.final_state);
    }
    return hist;
  }

 private:
  const FESpace& space_;
  MaterialParams params_;
  PenaltyConfig penalty_;
  BoundaryOptions bc_;
  StaggerConfig stagger_;
  Loads loads_;
  SparseOperator phase_fixed_;
  Eigen::VectorXd F_;
  std::vector<int> top_dofs_;
  LinearSolver elastic_solver_, phase_solver_;
};

inline StepResult staggered_step(const FESpace& space, FieldState& state, double load, const MaterialParams& params,
                                 const PenaltyConfig& penalty, const BoundaryOptions& bc = {},
                                 const StaggerConfig& stagger = {}) {
  StaggeredSolver solver(space, params, penalty, bc, stagger);
  return solver.step(state, load);
}

inline RunHistory run_load_schedule(const FESpace& space, const MaterialParams& params, const LoadSchedule& schedule,
                                    const PenaltyConfig& penalty, const BoundaryOptions& bc = {},
                                    const StaggerConfig& stagger = {},
                                    const StaggeredSolver::StepCallback& on_step = {}) {
  schedule.validate();
  StaggeredSolver solver(space, params, penalty, bc, stagger);
  return solver.run(schedule, on_step);
}

}  // namespace pffrac
