#include <gtest/gtest.h>

#include <cmath>

#include "surfmc/stepper.hpp"

namespace {

using surfmc::Sample;
using surfmc::SurfaceMesh;
using surfmc::TimeGrid;
using surfmc::Vec;
using surfmc::Vector;

TEST(Stepper, TimeGridConstruction) {
  const auto g = TimeGrid::from_steps(1.0, 4);
  EXPECT_EQ(g.steps, 4);
  EXPECT_DOUBLE_EQ(g.tau, 0.25);
  EXPECT_DOUBLE_EQ(g.time(3), 0.75);

  const auto h = TimeGrid::from_tau(1.0, 0.0625);
  EXPECT_EQ(h.steps, 16);
  EXPECT_THROW(TimeGrid::from_tau(1.0, 0.3), surfmc::Error);  // 1/0.3 is not integral
  EXPECT_THROW(TimeGrid::from_steps(1.0, 0), surfmc::Error);
}

// One implicit Euler step on a single static segment, checked against a dense
// 2x2 solve by Cramer's rule.
TEST(Stepper, SingleElementStepMatchesDenseSolve) {
  const auto circle = surfmc::unit_circle(1.0);
  SurfaceMesh<2> mesh;
  mesh.ref_vertices = {{1.0, 0.0}, {0.0, 1.0}};
  mesh.elements = {{0, 1}};
  const auto grid = TimeGrid::from_steps(1.0, 2);
  const auto levels = surfmc::precompute_time_levels(circle, mesh, grid);

  surfmc::PathProblem<2> problem;
  problem.alpha = [](const Vec<2>&, double, const Sample&) { return 2.0; };
  problem.rhs = [](const Vec<2>&, double, const Sample&) { return 3.0; };
  problem.initial = [](const Vec<2>& x, const Sample&) { return x[0]; };
  problem.options.cg_tol = 1e-14;
  const auto path = surfmc::simulate_path(levels, problem, Sample{});

  // Hand assembly: L = sqrt(2); M = (L/6)[[2,1],[1,2]], S = (2L)/L^2 [[1,-1],[-1,1]],
  // F = (3L/2)(1,1); system (M + tau S) U = M U_prev + tau F with tau = 1/2.
  const double len = std::sqrt(2.0);
  const double m00 = len / 3.0, m01 = len / 6.0;
  const double s00 = 2.0 / len, s01 = -2.0 / len;
  const double f = 1.5 * len;
  const double tau = 0.5;
  Vector u_prev{1.0, 0.0};  // interpolated initial x1
  for (int k = 0; k < 2; ++k) {
    const double a00 = m00 + tau * s00, a01 = m01 + tau * s01;
    const double b0 = m00 * u_prev[0] + m01 * u_prev[1] + tau * f;
    const double b1 = m01 * u_prev[0] + m00 * u_prev[1] + tau * f;
    const double det = a00 * a00 - a01 * a01;
    const Vector u{(b0 * a00 - b1 * a01) / det, (b1 * a00 - b0 * a01) / det};
    EXPECT_NEAR(path.states[k + 1][0], u[0], 1e-10);
    EXPECT_NEAR(path.states[k + 1][1], u[1], 1e-10);
    u_prev = u;
  }
  EXPECT_EQ(path.stats.solves, 2);
  EXPECT_LE(path.stats.max_relative_residual, 1e-14);
}

TEST(Stepper, ConstantStateIsStationaryOnStaticSurface) {
  // With f = 0 on a static surface, U = c solves every step exactly:
  // (M + tau S) c1 = M c1 because S annihilates constants.
  const auto sphere = surfmc::unit_sphere(1.0);
  const auto mesh = surfmc::initial_mesh(sphere, 2);
  const auto levels = surfmc::precompute_time_levels(sphere, mesh, TimeGrid::from_steps(1.0, 8));
  surfmc::PathProblem<3> problem;
  problem.alpha = [](const Vec<3>& x, double, const Sample&) { return 1.0 + x[0] * x[0]; };
  problem.rhs = [](const Vec<3>&, double, const Sample&) { return 0.0; };
  problem.initial = [](const Vec<3>&, const Sample&) { return 4.0; };
  problem.options.cg_tol = 1e-12;
  const auto path = surfmc::simulate_path(levels, problem, Sample{});
  for (const auto& state : path.states)
    for (const double v : state) EXPECT_NEAR(v, 4.0, 1e-9);
}

template <class Case>
double conservation_drift(int level, int steps) {
  constexpr int N = Case::ambient;
  const auto problem = surfmc::make_problem<Case>();
  const auto mesh = surfmc::initial_mesh(problem.surface, level);
  const auto levels =
      surfmc::precompute_time_levels(problem.surface, mesh, TimeGrid::from_steps(problem.surface.time_horizon(), steps));
  surfmc::PathProblem<N> path_problem;
  path_problem.alpha = [](const Vec<N>& x, double t, const Sample& y) { return Case::coefficient(x, t, y); };
  path_problem.rhs = [](const Vec<N>&, double, const Sample&) { return 0.0; };
  path_problem.initial = [](const Vec<N>& x, const Sample&) { return 1.0 + x[0]; };
  path_problem.options.cg_tol = 1e-10;
  const auto path = surfmc::simulate_path(levels, path_problem, Sample{0.6, -0.8});
  const double mass0 = surfmc::total_mass(levels[0].mass, path.states[0]);
  double drift = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k)
    drift = std::max(drift, std::abs(surfmc::total_mass(levels[k].mass, path.states[k]) - mass0));
  return drift / std::max(1.0, std::abs(mass0));
}

TEST(Stepper, MassConservationOnMovingSurfaces) {
  // The moving-mesh scheme conserves 1^T M^k U^k exactly up to CG tolerance.
  EXPECT_LE(conservation_drift<surfmc::EllipseCase>(2, 16), 1e-6);
  EXPECT_LE(conservation_drift<surfmc::EllipsoidCase>(1, 16), 1e-6);
}

template <class Case>
void affine_engine_matches_generic(int level, int steps) {
  constexpr int N = Case::ambient;
  const auto problem = surfmc::make_problem<Case>();
  const auto mesh = surfmc::initial_mesh(problem.surface, level);
  const auto levels =
      surfmc::precompute_time_levels(problem.surface, mesh, TimeGrid::from_steps(problem.surface.time_horizon(), steps));
  surfmc::StepperOptions options;
  options.cg_tol = 1e-12;
  const auto generic = surfmc::make_path_problem(problem, options);
  const auto expansion = surfmc::build_affine_expansion(levels, problem, options);
  for (const Sample y : {Sample{0.37, -0.81}, Sample{-0.93, 0.12}, Sample{0.0, 0.0}}) {
    const auto a = surfmc::simulate_path(levels, generic, y);
    const auto b = surfmc::simulate_path_affine(levels, expansion, y);
    ASSERT_EQ(a.states.size(), b.states.size());
    double scale = 1.0;
    for (const auto& st : a.states)
      for (const double v : st) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < a.states.size(); ++k)
      for (std::size_t i = 0; i < a.states[k].size(); ++i)
        EXPECT_NEAR(a.states[k][i], b.states[k][i], 1e-8 * scale);
  }
}

TEST(Stepper, AffineEngineMatchesGenericEllipse) {
  affine_engine_matches_generic<surfmc::EllipseCase>(2, 8);
}

TEST(Stepper, AffineEngineMatchesGenericEllipsoid) {
  affine_engine_matches_generic<surfmc::EllipsoidCase>(1, 8);
}

TEST(Stepper, AffineExpansionReproducesDirectAssembly) {
  // The probe-recovered stiffness/load bases must reproduce direct assembly
  // at an arbitrary Y to rounding accuracy (both are exact reformulations).
  using Case = surfmc::EllipseCase;
  const auto problem = surfmc::make_problem<Case>();
  const auto mesh = surfmc::initial_mesh(problem.surface, 2);
  const auto levels =
      surfmc::precompute_time_levels(problem.surface, mesh, TimeGrid::from_steps(1.0, 4));
  const auto expansion = surfmc::build_affine_expansion(levels, problem, {});
  const Sample y{0.63, -0.27};
  const int k = 3;  // an interior time level
  // Stiffness: S(Y) = S0 + Y1 S1 + Y2 S2.
  surfmc::SparseMatrix direct = levels[k].mass;
  surfmc::assemble_stiffness(
      levels[k].geometry, [&](const Vec<2>& x) { return Case::coefficient(x, levels[k].t, y); }, direct);
  const auto& basis = expansion.levels[k];
  double worst = 0.0, scale = direct.infinity_norm();
  for (std::size_t i = 0; i < direct.values.size(); ++i) {
    const double combined =
        basis.stiff0.values[i] + y[0] * basis.stiff1.values[i] + y[1] * basis.stiff2.values[i];
    worst = std::max(worst, std::abs(combined - direct.values[i]));
  }
  EXPECT_LE(worst, 1e-12 * scale);
  // Load: F(Y) combines the six quadratic-in-Y basis vectors.
  Vector load_direct;
  surfmc::assemble_load(levels[k].geometry,
                        [&](const Vec<2>& x) { return surfmc::rhs_ambient<Case>(x, levels[k].t, y); }, load_direct);
  const Vector combined = surfmc::combine_load(basis, y);
  double fworst = 0.0, fscale = 0.0;
  for (std::size_t i = 0; i < load_direct.size(); ++i) {
    fworst = std::max(fworst, std::abs(combined[i] - load_direct[i]));
    fscale = std::max(fscale, std::abs(load_direct[i]));
  }
  EXPECT_LE(fworst, 1e-11 * std::max(1.0, fscale));
}

TEST(Stepper, PathStatsAccumulate) {
  surfmc::PathStats stats;
  stats.absorb(surfmc::SolveStats{5, 1e-9});
  stats.absorb(surfmc::SolveStats{7, 1e-10});
  EXPECT_EQ(stats.solves, 2);
  EXPECT_EQ(stats.total_cg_iterations, 12);
  EXPECT_DOUBLE_EQ(stats.max_relative_residual, 1e-9);
}

}  // namespace
