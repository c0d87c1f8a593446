#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "surfmc/linalg.hpp"

namespace {

using surfmc::SparseMatrix;
using surfmc::Vector;

SparseMatrix two_by_two(double a00, double a01, double a10, double a11) {
  SparseMatrix m = SparseMatrix::from_adjacency({{0, 1}, {0, 1}});
  m.coeff(0, 0) = a00;
  m.coeff(0, 1) = a01;
  m.coeff(1, 0) = a10;
  m.coeff(1, 1) = a11;
  return m;
}

TEST(Linalg, PatternAndCoeffAccess) {
  SparseMatrix m = SparseMatrix::from_adjacency({{0, 2}, {1}, {0, 2}});
  EXPECT_EQ(m.n, 3);
  m.coeff(0, 2) = 5.0;
  EXPECT_EQ(m.coeff_or_zero(0, 2), 5.0);
  EXPECT_EQ(m.coeff_or_zero(0, 1), 0.0);
  EXPECT_THROW(m.coeff(0, 1), surfmc::Error);  // outside the pattern
}

TEST(Linalg, MultiplyAndNorm) {
  SparseMatrix m = two_by_two(1.0, -2.0, 3.0, 4.0);
  Vector y(2);
  m.multiply({1.0, 1.0}, y);
  EXPECT_DOUBLE_EQ(y[0], -1.0);
  EXPECT_DOUBLE_EQ(y[1], 7.0);
  EXPECT_DOUBLE_EQ(m.infinity_norm(), 7.0);
}

TEST(Linalg, CombineIntoSharedPattern) {
  SparseMatrix a = two_by_two(1.0, 2.0, 3.0, 4.0);
  SparseMatrix b = two_by_two(10.0, 20.0, 30.0, 40.0);
  SparseMatrix out = a;
  surfmc::combine_into(a, 0.5, b, out);
  EXPECT_DOUBLE_EQ(out.coeff(0, 0), 6.0);
  EXPECT_DOUBLE_EQ(out.coeff(1, 1), 24.0);
}

TEST(Linalg, PcgSolvesFrozenSystem) {
  // [[4, 1], [1, 3]] x = (1, 2)  =>  x = (1/11, 7/11).
  for (const auto precond : {surfmc::Preconditioner::None, surfmc::Preconditioner::Jacobi}) {
    SparseMatrix m = two_by_two(4.0, 1.0, 1.0, 3.0);
    Vector x(2, 0.0);
    const auto stats = surfmc::pcg_solve(m, {1.0, 2.0}, x, 1e-14, 100, precond);
    EXPECT_NEAR(x[0], 1.0 / 11.0, 1e-12);
    EXPECT_NEAR(x[1], 7.0 / 11.0, 1e-12);
    EXPECT_LE(stats.relative_residual, 1e-14);
    EXPECT_LE(stats.iterations, 2);  // CG is exact after n steps
  }
}

TEST(Linalg, ZeroRhsShortCircuits) {
  SparseMatrix m = two_by_two(4.0, 1.0, 1.0, 3.0);
  Vector x{5.0, -4.0};
  const auto stats = surfmc::pcg_solve(m, {0.0, 0.0}, x, 1e-10, 100, surfmc::Preconditioner::Jacobi);
  EXPECT_EQ(stats.iterations, 0);
  EXPECT_EQ(x[0], 0.0);
  EXPECT_EQ(x[1], 0.0);
}

TEST(Linalg, WarmStartAtSolutionTakesNoIterations) {
  SparseMatrix m = two_by_two(4.0, 1.0, 1.0, 3.0);
  Vector x{1.0 / 11.0, 7.0 / 11.0};
  const auto stats = surfmc::pcg_solve(m, {1.0, 2.0}, x, 1e-10, 100, surfmc::Preconditioner::Jacobi);
  EXPECT_EQ(stats.iterations, 0);
}

// Dense Gaussian elimination with partial pivoting as an independent oracle.
Vector dense_solve(std::vector<std::vector<double>> a, Vector b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

TEST(Linalg, PcgMatchesDenseSolveOnRandomSpdSystem) {
  const int n = 24;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  // Symmetric, strictly diagonally dominant band matrix.
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<int>> adjacency(n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) adjacency[i].push_back(j);
  SparseMatrix m = SparseMatrix::from_adjacency(adjacency);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 2); j < i; ++j) {
      const double v = uni(rng);
      dense[i][j] = dense[j][i] = v;
    }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) off += std::abs(dense[i][j]);
    dense[i][i] = off + 1.0;
    for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) m.coeff(i, j) = dense[i][j];
  }
  Vector b(n);
  for (auto& v : b) v = uni(rng);
  const Vector expect = dense_solve(dense, b);
  Vector x(n, 0.0);
  surfmc::pcg_solve(m, b, x, 1e-13, 10 * n, surfmc::Preconditioner::Jacobi);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], expect[i], 1e-10);
}

TEST(Linalg, IterationLimitThrowsWithDiagnostics) {
  SparseMatrix m = two_by_two(4.0, 1.0, 1.0, 3.0);
  Vector x(2, 0.0);
  try {
    surfmc::pcg_solve(m, {1.0, 2.0}, x, 1e-15, 1, surfmc::Preconditioner::None);
    FAIL() << "expected SolveError";
  } catch (const surfmc::SolveError& e) {
    EXPECT_EQ(e.iterations, 1);
    EXPECT_GT(e.residual, 0.0);
  }
}

TEST(Linalg, JacobiRequiresPositiveDiagonal) {
  SparseMatrix m = two_by_two(0.0, 1.0, 1.0, 3.0);
  Vector x(2, 0.0);
  EXPECT_THROW(surfmc::pcg_solve(m, {1.0, 2.0}, x, 1e-10, 10, surfmc::Preconditioner::Jacobi),
               surfmc::SolveError);
}

}  // namespace
