#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include <pffrac/solver.hpp>

#include "support.hpp"

using namespace pffrac;

namespace {

const MaterialParams steel_like = make_material(200.0, 0.2, 1.0, 0.02);

SparseOperator dense_to_sparse(const Eigen::MatrixXd& D) {
  SparseOperator A = D.sparseView();
  A.makeCompressed();
  return A;
}

Eigen::VectorXd solve_dirichlet(const SparseOperator& A, const Eigen::VectorXd& b, const DirichletSpec& spec) {
  auto [Ad, bd] = apply_dirichlet(A, b, spec);
  return solve_linear(Ad, bd);
}

// Coarse hole plate, cheap enough for full-schedule runs.
const FESpace& coarse_plate() {
  static const FESpace space(build_square_with_hole(10, 0.2), 2);
  return space;
}

}  // namespace

TEST(Dirichlet, TwoByTwoHandSolve) {
  Eigen::MatrixXd D(2, 2);
  D << 2, 1, 1, 2;
  DirichletSpec spec;
  spec.add(0, 3.0);
  const Eigen::VectorXd x = solve_dirichlet(dense_to_sparse(D), Eigen::Vector2d(1, 1), spec);
  EXPECT_NEAR(x[0], 3.0, 1e-15);
  EXPECT_NEAR(x[1], -1.0, 1e-15);
}

TEST(Dirichlet, EmptySpecLeavesSystemUnchanged) {
  Eigen::MatrixXd D(2, 2);
  D << 2, 1, 1, 2;
  const auto A = dense_to_sparse(D);
  const Eigen::Vector2d b(1, 1);
  const auto [Ad, bd] = apply_dirichlet(A, b, DirichletSpec{});
  EXPECT_EQ(Eigen::MatrixXd(Ad), D);
  EXPECT_EQ(bd, b);
}

TEST(Dirichlet, FixAllDofs) {
  const Eigen::MatrixXd R = Eigen::MatrixXd::Random(6, 6);
  const auto A = dense_to_sparse(R.transpose() * R + Eigen::MatrixXd::Identity(6, 6));
  DirichletSpec spec;
  for (int i = 0; i < 6; ++i) spec.add(i, 0.5 * i - 1.0);
  const Eigen::VectorXd x = solve_dirichlet(A, Eigen::VectorXd::Ones(6), spec);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(x[i], 0.5 * i - 1.0);
}

TEST(Dirichlet, MatchesReducedSystem) {
  std::mt19937 rng(4);
  const int n = 12;
  const Eigen::MatrixXd R = pffrac::testing::random_vector(n * n, rng).reshaped(n, n);
  const Eigen::MatrixXd D = R.transpose() * R + Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd b = pffrac::testing::random_vector(n, rng);
  DirichletSpec spec;
  spec.add(2, 0.7);
  spec.add(9, -1.2);
  spec.add(2, 0.7);  // repeated with the same value is fine
  const Eigen::VectorXd x = solve_dirichlet(dense_to_sparse(D), b, spec);

  // oracle: dense solve of the free block
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (i != 2 && i != 9) free.push_back(i);
  Eigen::VectorXd known = Eigen::VectorXd::Zero(n);
  known[2] = 0.7;
  known[9] = -1.2;
  const Eigen::VectorXd rhs = b - D * known;
  Eigen::MatrixXd Dff(free.size(), free.size());
  Eigen::VectorXd bf(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) {
    bf[a] = rhs[free[a]];
    for (std::size_t c = 0; c < free.size(); ++c) Dff(a, c) = D(free[a], free[c]);
  }
  const Eigen::VectorXd xf = Dff.llt().solve(bf);
  for (std::size_t a = 0; a < free.size(); ++a) EXPECT_NEAR(x[free[a]], xf[a], 1e-12);
  EXPECT_EQ(x[2], 0.7);
  EXPECT_EQ(x[9], -1.2);
}

TEST(Dirichlet, PreservesSymmetryAndPattern) {
  const FESpace space(build_rect_mesh(3, 3), 2);
  const auto K = assemble_elastic_stiffness(space, Eigen::VectorXd::Zero(space.n_dofs()), steel_like);
  const auto spec = displacement_constraints(space, 0.01, BoundaryOptions{});
  const auto [Kd, b] = apply_dirichlet(K, Eigen::VectorXd::Zero(K.rows()), spec);
  EXPECT_EQ(Kd.nonZeros(), K.nonZeros());
  EXPECT_LT(Eigen::MatrixXd(Kd - SparseOperator(Kd.transpose())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dirichlet, ConflictsAndRangeRejected) {
  DirichletSpec spec;
  spec.add(0, 1.0);
  spec.add(0, 2.0);
  const auto A = dense_to_sparse(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(apply_dirichlet(A, Eigen::Vector2d(1, 1), spec), std::invalid_argument);
  DirichletSpec out;
  out.add(5, 0.0);
  EXPECT_THROW(apply_dirichlet(A, Eigen::Vector2d(1, 1), out), std::invalid_argument);
}

TEST(LinearSolve, IdentityAndDiagonal) {
  const Eigen::Vector3d b(1.5, -2.0, 0.25);
  EXPECT_EQ(solve_linear(dense_to_sparse(Eigen::MatrixXd::Identity(3, 3)), b), b);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D.diagonal() << 2, 4;
  const Eigen::VectorXd x = solve_linear(dense_to_sparse(D), Eigen::Vector2d(2, 8));
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);
}

TEST(LinearSolve, RandomSpdResidual) {
  std::mt19937 rng(7);
  const int n = 50;
  const Eigen::MatrixXd R = pffrac::testing::random_vector(n * n, rng).reshaped(n, n);
  const auto A = dense_to_sparse(R.transpose() * R + Eigen::MatrixXd::Identity(n, n));
  const Eigen::VectorXd b = pffrac::testing::random_vector(n, rng);
  SolveReport report;
  const Eigen::VectorXd x = solve_linear(A, b, &report);
  EXPECT_LE((A * x - b).norm() / b.norm(), 1e-10);
  EXPECT_LE(report.relative_residual, 1e-10);
  EXPECT_EQ(solve_linear(A, b), x);
}

TEST(LinearSolve, PatternReuseGivesSameAnswer) {
  const FESpace space(build_rect_mesh(4, 4), 3);
  LinearSolver solver;
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(space.n_dofs());
  const SparseOperator A1 = assemble_mass(space) + assemble_laplace(space);
  const SparseOperator A2 = 2.0 * assemble_mass(space) + assemble_laplace(space);
  const Eigen::VectorXd x1 = solver.solve(A1, b);
  const Eigen::VectorXd x2 = solver.solve(A2, b);
  EXPECT_LT((A2 * x2 - b).norm(), 1e-10 * b.norm());
  EXPECT_LT((solve_linear(A1, b) - x1).norm(), 1e-14 * x1.norm());
}

TEST(LinearSolve, IndefiniteOperatorReported) {
  Eigen::MatrixXd D(2, 2);
  D << 1, 0, 0, -1;
  EXPECT_THROW(solve_linear(dense_to_sparse(D), Eigen::Vector2d(1, 1)), SolverError);
}

TEST(LoadSchedule, HolePlateTotals) {
  const auto values = hole_plate_schedule().applied_values();
  ASSERT_EQ(values.size(), 30u);
  EXPECT_NEAR(values[4], 0.07, 1e-15);
  EXPECT_NEAR(values.back(), 0.125, 1e-14);
}

TEST(LoadSchedule, Invariants) {
  EXPECT_THROW(LoadSchedule{}.validate(), std::invalid_argument);
  EXPECT_THROW((LoadSchedule{{{0, 1e-3}}}.validate()), std::invalid_argument);
  StaggerConfig bad;
  bad.max_stagger_iters = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = StaggerConfig{};
  bad.stagger_tol = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(BoundaryConditions, HoleAndTopConstraints) {
  const FESpace& space = coarse_plate();
  const auto rim = displacement_constraints(space, 0.02, BoundaryOptions{}).normalized();
  int top = 0, hole = 0;
  for (int i = 0; i < space.n_dofs(); ++i) {
    top += has(space.dof_markers()[i], Marker::top);
    hole += has(space.dof_markers()[i], Marker::hole);
  }
  EXPECT_EQ(rim.size(), static_cast<std::size_t>(2 * top + 2 * hole));

  BoundaryOptions pin;
  pin.hole = HoleCondition::center_point;
  pin.top_tangential_fixed = false;
  const auto pinned = displacement_constraints(space, 0.02, pin).normalized();
  EXPECT_EQ(pinned.size(), static_cast<std::size_t>(top + 2));

  BoundaryOptions zt;
  zt.phase_space = PhaseSpaceKind::zero_trace;
  EXPECT_TRUE(phase_constraints(space, BoundaryOptions{}).empty());
  EXPECT_FALSE(phase_constraints(space, zt).empty());
}

TEST(StaggeredStep, RequiresQuadraticOrHigher) {
  const FESpace space(build_rect_mesh(2, 2), 1);
  EXPECT_THROW(StaggeredSolver(space, steel_like, PenaltyConfig{}), std::invalid_argument);
}

TEST(StaggeredStep, ZeroLoadIsFixedPoint) {
  const FESpace& space = coarse_plate();
  FieldState state = make_state(space);
  const auto r = staggered_step(space, state, 0.0, steel_like, PenaltyConfig{5.0, true});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.stagger_iters, 1);
  EXPECT_EQ(state.u.norm(), 0.0);
  EXPECT_EQ(state.d.norm(), 0.0);
  EXPECT_EQ(r.reaction, 0.0);
}

TEST(StaggeredStep, SmallLoadMatchesElasticSolve) {
  const FESpace& space = coarse_plate();
  FieldState state = make_state(space);
  const double load = 1e-3;
  const auto r = staggered_step(space, state, load, steel_like, PenaltyConfig{5.0, true});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.stagger_iters, 2);
  EXPECT_LT(state.d.maxCoeff(), 0.05);

  // oracle: undamaged elastic solve
  const auto spec = displacement_constraints(space, load, BoundaryOptions{});
  const Eigen::VectorXd u0 = solve_dirichlet(
      assemble_elastic_stiffness(space, Eigen::VectorXd::Zero(space.n_dofs()), steel_like),
      Eigen::VectorXd::Zero(2 * space.n_dofs()), spec);
  EXPECT_LT((state.u - u0).norm(), 1e-3 * u0.norm());
}

TEST(StaggeredStep, RepeatedStepIsIdempotent) {
  const FESpace& space = coarse_plate();
  StaggeredSolver solver(space, steel_like, PenaltyConfig{5.0, true});
  FieldState state = solver.initial_state();
  solver.step(state, 0.03);
  const FieldState first = state;
  const auto again = solver.step(state, 0.03);
  EXPECT_TRUE(again.converged);
  EXPECT_EQ(again.stagger_iters, 1);
  EXPECT_LT((state.d - first.d).norm(), 1e-5 * std::max(first.d.norm(), 1.0));
  for (std::size_t k = 0; k < state.H.values.size(); ++k) EXPECT_GE(state.H.values[k], first.H.values[k]);
}

TEST(StaggeredStep, PhaseSolveIsDeterministicForFixedHistory) {
  const FESpace& space = coarse_plate();
  std::mt19937 rng(9);
  const HistoryField H = pffrac::testing::random_history(space, rng, 1.0);
  const auto A = assemble_phasefield_jacobian(space, H, steel_like, PenaltyConfig{5.0, true});
  const Eigen::VectorXd b = phasefield_load(space, H);
  const Eigen::VectorXd d1 = solve_linear(A, b);
  const Eigen::VectorXd d2 = solve_linear(A, b);
  EXPECT_EQ(d1, d2);
  EXPECT_LE(phase_residual(space, d1, H, steel_like, PenaltyConfig{5.0, true}).norm(), 1e-10 * b.norm());
}

TEST(LoadLoop, ZeroIncrementScheduleHasZeroReaction) {
  const auto hist = run_load_schedule(coarse_plate(), steel_like, LoadSchedule{{{3, 0.0}}}, PenaltyConfig{5.0, true});
  ASSERT_EQ(hist.records.size(), 3u);
  for (const auto& r : hist.records) {
    EXPECT_EQ(r.reaction_kN, 0.0);
    EXPECT_EQ(r.max_d, 0.0);
    EXPECT_EQ(r.elastic_energy, 0.0);
    EXPECT_EQ(r.surface_energy, 0.0);
    EXPECT_TRUE(r.converged);
  }
  EXPECT_THROW(run_load_schedule(coarse_plate(), steel_like, LoadSchedule{}, PenaltyConfig{}), std::invalid_argument);
}

TEST(LoadLoop, StiffMaterialStaysIntact) {
  const MaterialParams tough = make_material(200.0, 0.2, 1e6, 0.02);
  const auto hist = run_load_schedule(coarse_plate(), tough, hole_plate_schedule(), PenaltyConfig{5.0, true});
  ASSERT_EQ(hist.records.size(), 30u);
  for (const auto& r : hist.records) EXPECT_LT(r.max_d, 1e-3);
  // linear elastic: reaction proportional to the applied displacement
  const double k = hist.records.front().reaction_kN / hist.records.front().applied_uy_mm;
  EXPECT_NEAR(hist.records.back().reaction_kN, k * 0.125, 1e-3 * k * 0.125);
}

TEST(LoadLoop, FullScheduleOnCoarsePlate) {
  const FESpace& space = coarse_plate();
  std::vector<double> prev_h(make_history(space).values.size(), 0.0);
  bool monotone = true;
  const auto hist = run_load_schedule(space, steel_like, hole_plate_schedule(), PenaltyConfig{5.0, true}, {}, {},
                                      [&](const CurveRecord&, const FieldState& s) {
                                        for (std::size_t k = 0; k < prev_h.size(); ++k)
                                          monotone = monotone && s.H.values[k] >= prev_h[k];
                                        prev_h = s.H.values;
                                      });
  ASSERT_FALSE(hist.aborted) << hist.diagnostic;
  ASSERT_EQ(hist.records.size(), 30u);
  EXPECT_TRUE(monotone);
  EXPECT_GT(hist.records.back().max_d, 0.95);
  for (std::size_t s = 1; s < hist.records.size(); ++s) {
    EXPECT_EQ(hist.records[s].step, static_cast<int>(s + 1));
    if (hist.records[s - 1].max_d > 0.5)
      EXPECT_GE(hist.records[s].surface_energy, hist.records[s - 1].surface_energy - 1e-8) << "step " << s + 1;
  }
}
