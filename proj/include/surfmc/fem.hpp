#pragma once

#include <cmath>
#include <vector>

#include "surfmc/errors.hpp"
#include "surfmc/linalg.hpp"
#include "surfmc/mesh.hpp"
#include "surfmc/quadrature.hpp"

// P1 surface finite elements on the flat simplicial mesh: element mass
// matrices in closed form, stiffness with a variable scalar coefficient
// evaluated by quadrature on the flat elements, load vectors and discrete L2
// norms with the same degree-4 rule.

namespace surfmc {

// Flat geometry of a mesh at one time instant, precomputed once and shared by
// all assemblies at that instant: element frames plus the ambient coordinates
// of the quadrature points.
template <int N>
struct GeometryCache {
  const SurfaceMesh<N>* mesh = nullptr;
  std::vector<Vec<N>> positions;
  std::vector<ElementFrame<N>> frames;
  std::vector<std::array<Vec<N>, QuadratureRule<N>::point_count>> qpoints;
  double total_measure = 0.0;

  int vertex_count() const { return mesh->vertex_count(); }
  int element_count() const { return mesh->element_count(); }
};

template <int N>
GeometryCache<N> build_geometry_cache(const SurfaceMesh<N>& mesh, std::vector<Vec<N>> positions) {
  if (static_cast<int>(positions.size()) != mesh.vertex_count())
    throw Error("position count does not match the mesh vertex count");
  GeometryCache<N> cache;
  cache.mesh = &mesh;
  cache.positions = std::move(positions);
  cache.frames.reserve(mesh.element_count());
  cache.qpoints.resize(mesh.element_count());
  const auto& rule = reference_quadrature<N>();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto p = element_positions<N>(mesh, cache.positions, e);
    cache.frames.push_back(element_frame(p));
    cache.total_measure += cache.frames.back().measure;
    for (int q = 0; q < rule.point_count; ++q) {
      Vec<N> x{};
      for (int i = 0; i < N; ++i) x = x + rule.barycentric[q][i] * p[i];
      cache.qpoints[e][q] = x;
    }
  }
  return cache;
}

// Sparsity pattern of all vertex-coupled matrices (mass, stiffness, system).
template <int N>
SparseMatrix assemble_pattern(const SurfaceMesh<N>& mesh) {
  std::vector<std::vector<int>> rows(mesh.vertex_count());
  for (int j = 0; j < mesh.vertex_count(); ++j) rows[j].push_back(j);
  for (const auto& e : mesh.elements)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (i != j) rows[e[i]].push_back(e[j]);
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return SparseMatrix::from_adjacency(rows);
}

// Mass matrix from the closed-form P1 element matrices
//   segment: (L/6) [[2,1],[1,2]]     triangle: (A/12) [[2,1,1],[1,2,1],[1,1,2]]
template <int N>
void assemble_mass(const GeometryCache<N>& cache, SparseMatrix& m) {
  m.zero();
  const double diag = (N == 2) ? 1.0 / 3.0 : 1.0 / 6.0;
  const double off = (N == 2) ? 1.0 / 6.0 : 1.0 / 12.0;
  for (int e = 0; e < cache.element_count(); ++e) {
    const auto& el = cache.mesh->elements[e];
    const double measure = cache.frames[e].measure;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m.coeff(el[i], el[j]) += measure * (i == j ? diag : off);
  }
}

// Stiffness with scalar coefficient alpha(x) evaluated at the quadrature
// points of the flat elements:  S_ij = sum_E (int_E alpha) grad chi_i . grad chi_j.
template <int N, class AlphaFn>
void assemble_stiffness(const GeometryCache<N>& cache, AlphaFn&& alpha, SparseMatrix& s,
                        bool check_ellipticity = true) {
  s.zero();
  const auto& rule = reference_quadrature<N>();
  for (int e = 0; e < cache.element_count(); ++e) {
    const auto& el = cache.mesh->elements[e];
    const auto& frame = cache.frames[e];
    const double scale = frame.measure / rule.reference_measure;
    double alpha_integral = 0.0;
    for (int q = 0; q < rule.point_count; ++q) {
      const double a = alpha(cache.qpoints[e][q]);
      if (check_ellipticity && !(a > 0.0))
        throw EllipticityError("diffusion coefficient is not positive at a quadrature point");
      alpha_integral += rule.weights[q] * scale * a;
    }
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        s.coeff(el[i], el[j]) += alpha_integral * dot<double, N>(frame.basis_gradients[i], frame.basis_gradients[j]);
  }
}

// Load vector F_j = int f chi_j with the degree-4 rule.
template <int N, class SourceFn>
void assemble_load(const GeometryCache<N>& cache, SourceFn&& f, Vector& out) {
  if (static_cast<int>(out.size()) != cache.vertex_count()) out.assign(cache.vertex_count(), 0.0);
  else std::fill(out.begin(), out.end(), 0.0);
  const auto& rule = reference_quadrature<N>();
  for (int e = 0; e < cache.element_count(); ++e) {
    const auto& el = cache.mesh->elements[e];
    const double scale = cache.frames[e].measure / rule.reference_measure;
    for (int q = 0; q < rule.point_count; ++q) {
      const double fw = rule.weights[q] * scale * f(cache.qpoints[e][q]);
      for (int i = 0; i < N; ++i) out[el[i]] += fw * rule.barycentric[q][i];
    }
  }
}

// Vertex interpolation of a pointwise function.
template <int N, class Fn>
Vector interpolate(const GeometryCache<N>& cache, Fn&& fn) {
  Vector v(cache.vertex_count());
  for (int j = 0; j < cache.vertex_count(); ++j) v[j] = fn(cache.positions[j]);
  return v;
}

// || fn - sum_j coeff_j chi_j ||_{L2(Gamma_h)} with the degree-4 rule.  Pass a
// zero function / empty coefficients for plain norms of either argument.
template <int N, class Fn>
double l2_error(const GeometryCache<N>& cache, Fn&& fn, const Vector& coeff) {
  const bool has_field = !coeff.empty();
  if (has_field && static_cast<int>(coeff.size()) != cache.vertex_count())
    throw Error("coefficient vector does not match the mesh vertex count");
  const auto& rule = reference_quadrature<N>();
  double acc = 0.0;
  for (int e = 0; e < cache.element_count(); ++e) {
    const auto& el = cache.mesh->elements[e];
    const double scale = cache.frames[e].measure / rule.reference_measure;
    for (int q = 0; q < rule.point_count; ++q) {
      double d = fn(cache.qpoints[e][q]);
      if (has_field)
        for (int i = 0; i < N; ++i) d -= coeff[el[i]] * rule.barycentric[q][i];
      acc += rule.weights[q] * scale * d * d;
    }
  }
  return std::sqrt(acc);
}

template <int N, class Fn>
double l2_norm(const GeometryCache<N>& cache, Fn&& fn) {
  return l2_error<N>(cache, fn, Vector{});
}

template <int N>
double l2_norm(const GeometryCache<N>& cache, const Vector& coeff) {
  return l2_error<N>(cache, [](const Vec<N>&) { return 0.0; }, coeff);
}

}  // namespace surfmc
