#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "surfmc/errors.hpp"

// Minimal sparse kernel for the time stepping: CSR matrices over a fixed
// sparsity pattern (the mesh connectivity never changes, only values do) and
// a Jacobi-preconditioned conjugate gradient solver.

namespace surfmc {

using Vector = std::vector<double>;

inline double vec_dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double vec_norm(const Vector& a) { return std::sqrt(vec_dot(a, a)); }

// y += c * x
inline void vec_axpy(double c, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;   // size n+1
  std::vector<int> col_idx;   // size nnz, ascending within each row
  std::vector<double> values; // size nnz

  // Build the pattern from per-row neighbour lists (must include the diagonal).
  static SparseMatrix from_adjacency(const std::vector<std::vector<int>>& rows) {
    SparseMatrix a;
    a.n = static_cast<int>(rows.size());
    a.row_ptr.resize(rows.size() + 1, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) a.row_ptr[i + 1] = a.row_ptr[i] + static_cast<int>(rows[i].size());
    a.col_idx.reserve(a.row_ptr.back());
    for (const auto& r : rows) a.col_idx.insert(a.col_idx.end(), r.begin(), r.end());
    a.values.assign(a.col_idx.size(), 0.0);
    return a;
  }

  void zero() { std::fill(values.begin(), values.end(), 0.0); }

  // Reference to the stored entry (i, j); the pair must be in the pattern.
  double& coeff(int i, int j) {
    const auto first = col_idx.begin() + row_ptr[i];
    const auto last = col_idx.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) throw Error("sparse entry outside the assembled pattern");
    return values[static_cast<std::size_t>(it - col_idx.begin())];
  }

  double coeff_or_zero(int i, int j) const {
    const auto first = col_idx.begin() + row_ptr[i];
    const auto last = col_idx.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return (it == last || *it != j) ? 0.0 : values[static_cast<std::size_t>(it - col_idx.begin())];
  }

  void multiply(const Vector& x, Vector& y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
      y[i] = s;
    }
  }

  double infinity_norm() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += std::abs(values[k]);
      m = std::max(m, s);
    }
    return m;
  }
};

// this = a + c * b over a shared pattern (used for M + tau*S and the
// affine-in-sample matrix combinations).
inline void combine_into(const SparseMatrix& a, double c, const SparseMatrix& b, SparseMatrix& out) {
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] + c * b.values[k];
}

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

enum class Preconditioner { None, Jacobi };

// Preconditioned conjugate gradients for SPD systems.  `x` enters as the
// initial guess (warm start) and leaves as the solution.  Termination:
// ||b - A x||_2 <= tol * ||b||_2; b = 0 short-circuits to x = 0.
inline SolveStats pcg_solve(const SparseMatrix& a, const Vector& b, Vector& x, double tol, int max_iter,
                            Preconditioner precond = Preconditioner::Jacobi) {
  const int n = a.n;
  const double bnorm = vec_norm(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }

  Vector inv_diag;
  if (precond == Preconditioner::Jacobi) {
    inv_diag.resize(n);
    for (int i = 0; i < n; ++i) {
      double d = 0.0;
      for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
        if (a.col_idx[k] == i) d = a.values[k];
      if (!(d > 0.0)) throw SolveError("Jacobi preconditioner needs a positive diagonal", 0, 1.0);
      inv_diag[i] = 1.0 / d;
    }
  }
  const auto apply_precond = [&](const Vector& r, Vector& z) {
    if (precond == Preconditioner::Jacobi) {
      for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    } else {
      z = r;
    }
  };

  Vector r(n), z(n), p(n), q(n);
  a.multiply(x, q);
  for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = vec_norm(r);
  if (rnorm <= tol * bnorm) return {0, rnorm / bnorm};

  apply_precond(r, z);
  p = z;
  double rz = vec_dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    a.multiply(p, q);
    const double pq = vec_dot(p, q);
    if (!(pq > 0.0)) throw SolveError("CG breakdown: matrix is not positive definite", it, rnorm / bnorm);
    const double alpha = rz / pq;
    vec_axpy(alpha, p, x);
    vec_axpy(-alpha, q, r);
    rnorm = vec_norm(r);
    if (rnorm <= tol * bnorm) return {it, rnorm / bnorm};
    apply_precond(r, z);
    const double rz_next = vec_dot(r, z);
    const double beta = rz_next / rz;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_next;
  }
  throw SolveError("CG iteration limit reached", max_iter, rnorm / bnorm);
}

}  // namespace surfmc
