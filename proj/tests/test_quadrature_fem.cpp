#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "surfmc/fem.hpp"
#include "surfmc/manufactured.hpp"

namespace {

using surfmc::GeometryCache;
using surfmc::SparseMatrix;
using surfmc::SurfaceMesh;
using surfmc::Vec;
using surfmc::Vector;

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

TEST(Quadrature, RuleInvariants) {
  const auto& seg = surfmc::reference_quadrature<2>();
  double wsum = 0.0;
  for (int q = 0; q < seg.point_count; ++q) {
    wsum += seg.weights[q];
    EXPECT_NEAR(seg.barycentric[q][0] + seg.barycentric[q][1], 1.0, 1e-15);
    EXPECT_GT(seg.weights[q], 0.0);
  }
  EXPECT_NEAR(wsum, seg.reference_measure, 1e-15);

  const auto& tri = surfmc::reference_quadrature<3>();
  wsum = 0.0;
  for (int q = 0; q < tri.point_count; ++q) {
    wsum += tri.weights[q];
    double bsum = 0.0;
    for (int i = 0; i < 3; ++i) {
      bsum += tri.barycentric[q][i];
      EXPECT_GT(tri.barycentric[q][i], 0.0);
    }
    EXPECT_NEAR(bsum, 1.0, 1e-15);
    EXPECT_GT(tri.weights[q], 0.0);
  }
  EXPECT_NEAR(wsum, tri.reference_measure, 1e-15);
}

TEST(Quadrature, SegmentRuleExactThroughDegreeFive) {
  const auto& seg = surfmc::reference_quadrature<2>();
  for (int p = 0; p <= 5; ++p) {
    double q = 0.0;
    for (int i = 0; i < seg.point_count; ++i) q += seg.weights[i] * std::pow(seg.barycentric[i][1], p);
    EXPECT_NEAR(q, 1.0 / (p + 1), 1e-14) << "monomial x^" << p;
  }
}

TEST(Quadrature, TriangleRuleExactThroughDegreeFour) {
  // int_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!.
  const auto& tri = surfmc::reference_quadrature<3>();
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      double q = 0.0;
      for (int i = 0; i < tri.point_count; ++i)
        q += tri.weights[i] * std::pow(tri.barycentric[i][1], a) * std::pow(tri.barycentric[i][2], b);
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      EXPECT_NEAR(q, exact, 1e-14) << "monomial x^" << a << " y^" << b;
    }
  // Spot checks against hand values: int x^2 y^2 = 1/180, int x^4 = 1/30.
  EXPECT_NEAR(factorial(2) * factorial(2) / factorial(6), 1.0 / 180.0, 1e-18);
  EXPECT_NEAR(factorial(4) / factorial(6), 1.0 / 30.0, 1e-18);
}

TEST(Fem, ElementFrameGradientsFrozen) {
  const std::array<Vec<3>, 3> tri{{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
  const auto f = surfmc::element_frame(tri);
  EXPECT_NEAR(f.measure, 0.5, 1e-15);
  const double expect[3][3] = {{-1.0, -1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  for (int i = 0; i < 3; ++i)
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(f.basis_gradients[i][d], expect[i][d], 1e-14);

  const std::array<Vec<2>, 2> seg{{{2.0, 0.0}, {4.0, 0.0}}};
  const auto g = surfmc::element_frame(seg);
  EXPECT_NEAR(g.measure, 2.0, 1e-15);
  EXPECT_NEAR(g.basis_gradients[0][0], -0.5, 1e-15);
  EXPECT_NEAR(g.basis_gradients[1][0], 0.5, 1e-15);
}

TEST(Fem, ElementFrameOrientationIndependent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Vec<3>, 3> p;
    for (auto& v : p) v = {uni(rng), uni(rng), uni(rng)};
    const auto f = surfmc::element_frame(p);
    const std::array<Vec<3>, 3> swapped{p[0], p[2], p[1]};
    const auto g = surfmc::element_frame(swapped);
    EXPECT_NEAR(f.measure, g.measure, 1e-14);
    for (int d = 0; d < 3; ++d) {
      EXPECT_NEAR(f.basis_gradients[0][d], g.basis_gradients[0][d], 1e-12);
      EXPECT_NEAR(f.basis_gradients[1][d], g.basis_gradients[2][d], 1e-12);
      EXPECT_NEAR(f.basis_gradients[2][d], g.basis_gradients[1][d], 1e-12);
    }
  }
}

// A one-element mesh on a static surface for element-level assembly checks.
GeometryCache<3> unit_triangle_cache(SurfaceMesh<3>& mesh) {
  mesh.ref_vertices = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  mesh.elements = {{0, 1, 2}};
  return surfmc::build_geometry_cache(mesh, mesh.ref_vertices);
}

TEST(Fem, MassMatrixClosedForm) {
  SurfaceMesh<3> mesh;
  const auto cache = unit_triangle_cache(mesh);
  SparseMatrix m = surfmc::assemble_pattern(mesh);
  surfmc::assemble_mass(cache, m);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.coeff(i, j), (i == j ? 2.0 : 1.0) / 24.0, 1e-15);
}

TEST(Fem, StiffnessMatrixClosedForm) {
  SurfaceMesh<3> mesh;
  const auto cache = unit_triangle_cache(mesh);
  SparseMatrix s = surfmc::assemble_pattern(mesh);
  surfmc::assemble_stiffness(cache, [](const Vec<3>&) { return 1.0; }, s);
  const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(s.coeff(i, j), expect[i][j], 1e-15);
}

TEST(Fem, StiffnessWithVariableCoefficient) {
  // alpha = 1 + x1:  int_T alpha = 2/3 (hand integral), so S = (2/3) g_i . g_j.
  SurfaceMesh<3> mesh;
  const auto cache = unit_triangle_cache(mesh);
  SparseMatrix s = surfmc::assemble_pattern(mesh);
  surfmc::assemble_stiffness(cache, [](const Vec<3>& x) { return 1.0 + x[0]; }, s);
  EXPECT_NEAR(s.coeff(0, 0), 2.0 / 3.0 * 2.0, 1e-14);
  EXPECT_NEAR(s.coeff(0, 1), -2.0 / 3.0, 1e-14);
  EXPECT_NEAR(s.coeff(1, 2), 0.0, 1e-14);
}

TEST(Fem, LoadVectorHandValues) {
  SurfaceMesh<3> mesh;
  const auto cache = unit_triangle_cache(mesh);
  Vector f;
  surfmc::assemble_load(cache, [](const Vec<3>&) { return 1.0; }, f);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(f[i], 1.0 / 6.0, 1e-15);
  // f = x1: integrals against the three hat functions are 1/24, 1/12, 1/24.
  surfmc::assemble_load(cache, [](const Vec<3>& x) { return x[0]; }, f);
  EXPECT_NEAR(f[0], 1.0 / 24.0, 1e-15);
  EXPECT_NEAR(f[1], 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(f[2], 1.0 / 24.0, 1e-15);
}

TEST(Fem, EllipticityGuard) {
  SurfaceMesh<3> mesh;
  const auto cache = unit_triangle_cache(mesh);
  SparseMatrix s = surfmc::assemble_pattern(mesh);
  EXPECT_THROW(surfmc::assemble_stiffness(cache, [](const Vec<3>& x) { return x[0] - 0.5; }, s),
               surfmc::EllipticityError);
  EXPECT_NO_THROW(
      surfmc::assemble_stiffness(cache, [](const Vec<3>& x) { return x[0] - 0.5; }, s, false));
}

TEST(Fem, InterpolationAndL2Error) {
  SurfaceMesh<3> mesh;
  const auto cache = unit_triangle_cache(mesh);
  const auto linear = [](const Vec<3>& x) { return 2.0 * x[0] - x[1] + 1.0; };
  const Vector u = surfmc::interpolate(cache, linear);
  EXPECT_NEAR(surfmc::l2_error(cache, linear, u), 0.0, 1e-14);  // P1 reproduces linears
  const Vector ones(3, 1.0);
  EXPECT_NEAR(surfmc::l2_norm(cache, ones), std::sqrt(0.5), 1e-14);
}

// Symmetric Jacobi eigenvalue iteration; small dense matrices only.
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(a[i][j]));
    if (off < 1e-13) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-15) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[i][i];
  return ev;
}

std::vector<std::vector<double>> densify(const SparseMatrix& m) {
  std::vector<std::vector<double>> d(m.n, std::vector<double>(m.n, 0.0));
  for (int i = 0; i < m.n; ++i)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) d[i][m.col_idx[k]] = m.values[k];
  return d;
}

TEST(Fem, MassMatrixIsSpdOnSurfaceMesh) {
  const auto ellipsoid = surfmc::oscillating_ellipsoid(1.0);
  const auto mesh = surfmc::initial_mesh(ellipsoid, 1);  // 18 vertices
  const auto cache = surfmc::build_geometry_cache(mesh, surfmc::vertices_at(mesh, ellipsoid, 0.4));
  SparseMatrix m = surfmc::assemble_pattern(mesh);
  surfmc::assemble_mass(cache, m);
  for (const double ev : symmetric_eigenvalues(densify(m))) EXPECT_GT(ev, 0.0);
}

TEST(Fem, MassTotalEqualsSurfaceMeasure) {
  // sum_ij M_ij = int (sum_i chi_i)^2 = |Gamma_h|.
  const auto ellipsoid = surfmc::oscillating_ellipsoid(1.0);
  const auto mesh = surfmc::initial_mesh(ellipsoid, 2);
  const auto cache = surfmc::build_geometry_cache(mesh, surfmc::vertices_at(mesh, ellipsoid, 0.8));
  SparseMatrix m = surfmc::assemble_pattern(mesh);
  surfmc::assemble_mass(cache, m);
  double total = 0.0;
  for (const double v : m.values) total += v;
  EXPECT_NEAR(total, cache.total_measure, 1e-12 * cache.total_measure);
}

TEST(Fem, StiffnessKernelContainsConstants) {
  const auto problem = surfmc::make_problem<surfmc::EllipsoidCase>();
  const auto mesh = surfmc::initial_mesh(problem.surface, 2);
  const auto cache = surfmc::build_geometry_cache(mesh, surfmc::vertices_at(mesh, problem.surface, 0.3));
  SparseMatrix s = surfmc::assemble_pattern(mesh);
  const surfmc::Sample y{0.9, -0.2};
  surfmc::assemble_stiffness(
      cache, [&](const Vec<3>& x) { return surfmc::EllipsoidCase::coefficient(x, 0.3, y); }, s);
  Vector ones(s.n, 1.0), s1(s.n);
  s.multiply(ones, s1);
  double worst = 0.0;
  for (const double v : s1) worst = std::max(worst, std::abs(v));
  EXPECT_LE(worst, 1e-12 * s.infinity_norm());
}

TEST(Fem, StiffnessRayleighQuotientRespectsCoefficientBounds) {
  // S(alpha) is sandwiched between alpha_min S(1) and alpha_max S(1) because
  // every per-element block is positive semidefinite.
  const auto problem = surfmc::make_problem<surfmc::EllipseCase>();
  const auto mesh = surfmc::initial_mesh(problem.surface, 3);
  const auto cache = surfmc::build_geometry_cache(mesh, surfmc::vertices_at(mesh, problem.surface, 0.5));
  SparseMatrix s_alpha = surfmc::assemble_pattern(mesh);
  SparseMatrix s_one = surfmc::assemble_pattern(mesh);
  const surfmc::Sample y{0.7, -0.9};
  surfmc::assemble_stiffness(
      cache, [&](const Vec<2>& x) { return surfmc::EllipseCase::coefficient(x, 0.5, y); }, s_alpha);
  surfmc::assemble_stiffness(cache, [](const Vec<2>&) { return 1.0; }, s_one);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector u(s_alpha.n), su(s_alpha.n);
  for (int trial = 0; trial < 10; ++trial) {
    for (auto& v : u) v = uni(rng);
    s_alpha.multiply(u, su);
    const double qa = surfmc::vec_dot(u, su);
    s_one.multiply(u, su);
    const double q1 = surfmc::vec_dot(u, su);
    EXPECT_GE(qa, problem.coefficient.alpha_min * q1 - 1e-12);
    EXPECT_LE(qa, problem.coefficient.alpha_max * q1 + 1e-12);
  }
}

TEST(Fem, GeometryCacheQuadraturePointsAreBarycentric) {
  const auto ellipsoid = surfmc::oscillating_ellipsoid(1.0);
  const auto mesh = surfmc::initial_mesh(ellipsoid, 1);
  const auto cache = surfmc::build_geometry_cache(mesh, surfmc::vertices_at(mesh, ellipsoid, 0.2));
  const auto& rule = surfmc::reference_quadrature<3>();
  const auto p = surfmc::element_positions(mesh, cache.positions, 5);
  for (int q = 0; q < rule.point_count; ++q)
    for (int d = 0; d < 3; ++d) {
      double x = 0.0;
      for (int i = 0; i < 3; ++i) x += rule.barycentric[q][i] * p[i][d];
      EXPECT_NEAR(cache.qpoints[5][q][d], x, 1e-14);
    }
}

}  // namespace
