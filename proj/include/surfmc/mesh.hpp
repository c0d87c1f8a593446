#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "surfmc/errors.hpp"
#include "surfmc/geometry.hpp"
#include "surfmc/point.hpp"

// Simplicial meshes of the evolving surface.  Connectivity and the reference
// vertex positions (on Gamma(0)) are fixed once; positions at later times are
// obtained by pushing the reference vertices through the exact flow map, which
// is what makes the moving-mesh scheme's transport property hold.
//
// Elements are (N-1)-simplices with N vertices: segments in R^2, triangles in
// R^3.

namespace surfmc {

template <int N>
struct SurfaceMesh {
  std::vector<Vec<N>> ref_vertices;          // vertex positions on Gamma(0)
  std::vector<std::array<int, N>> elements;  // vertex indices, consistently oriented
  int level = 0;                             // number of refinements from the base mesh

  int vertex_count() const { return static_cast<int>(ref_vertices.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
};

// Per-element flat geometry: measure and the (constant) ambient gradients of
// the P1 barycentric basis functions.
template <int N>
struct ElementFrame {
  double measure = 0.0;  // length (N=2) or area (N=3)
  std::array<Vec<N>, N> basis_gradients{};
};

template <int N>
double element_diameter(const std::array<Vec<N>, N>& p) {
  double d = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) d = std::max(d, distance<N>(p[i], p[j]));
  return d;
}

inline ElementFrame<2> element_frame(const std::array<Vec<2>, 2>& p) {
  const Vec<2> e = p[1] - p[0];
  const double len = norm<double, 2>(e);
  const double scale = 1.0 + std::max(max_abs<2>(p[0]), max_abs<2>(p[1]));
  if (len < 1e-14 * scale) throw DegenerateElementError("segment has vanishing length");
  ElementFrame<2> f;
  f.measure = len;
  const double inv_len2 = 1.0 / (len * len);
  f.basis_gradients[0] = -inv_len2 * e;
  f.basis_gradients[1] = inv_len2 * e;
  return f;
}

inline ElementFrame<3> element_frame(const std::array<Vec<3>, 3>& p) {
  const Vec<3> n = cross(p[1] - p[0], p[2] - p[0]);
  const double two_area = norm<double, 3>(n);
  const double diam = element_diameter<3>(p);
  if (two_area < 2e-14 * diam * diam) throw DegenerateElementError("triangle has vanishing area");
  ElementFrame<3> f;
  f.measure = 0.5 * two_area;
  const Vec<3> unit = (1.0 / two_area) * n;
  // grad lambda_i = n_hat x (p_{i+2} - p_{i+1}) / (2A); orientation-independent
  // because flipping the element flips both factors.
  for (int i = 0; i < 3; ++i)
    f.basis_gradients[i] = (1.0 / two_area) * cross(unit, p[(i + 2) % 3] - p[(i + 1) % 3]);
  return f;
}

// --- construction -----------------------------------------------------------

namespace detail {

template <int N>
SurfaceMesh<N> base_mesh(const EvolvingSurface<N>& surface) {
  SurfaceMesh<N> m;
  if constexpr (N == 2) {
    // 4-gon with vertices at the axis intersections, counter-clockwise.
    m.ref_vertices = {surface.project_to_surface({1.0, 0.0}, 0.0),
                      surface.project_to_surface({0.0, 1.0}, 0.0),
                      surface.project_to_surface({-1.0, 0.0}, 0.0),
                      surface.project_to_surface({0.0, -1.0}, 0.0)};
    m.elements = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  } else {
    // Octahedron with vertices at the axis intersections, outward-oriented.
    m.ref_vertices = {surface.project_to_surface({1.0, 0.0, 0.0}, 0.0),
                      surface.project_to_surface({-1.0, 0.0, 0.0}, 0.0),
                      surface.project_to_surface({0.0, 1.0, 0.0}, 0.0),
                      surface.project_to_surface({0.0, -1.0, 0.0}, 0.0),
                      surface.project_to_surface({0.0, 0.0, 1.0}, 0.0),
                      surface.project_to_surface({0.0, 0.0, -1.0}, 0.0)};
    m.elements = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                  {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  }
  return m;
}

}  // namespace detail

// Uniform refinement: split every element at its edge midpoints and project
// the new vertices onto Gamma(0).  Edge midpoints are shared between
// neighbouring elements, so the refined mesh stays conforming and closed.
template <int N>
SurfaceMesh<N> refine(const SurfaceMesh<N>& mesh, const EvolvingSurface<N>& surface) {
  SurfaceMesh<N> out;
  out.ref_vertices = mesh.ref_vertices;
  out.level = mesh.level + 1;
  std::map<std::pair<int, int>, int> midpoint;
  const auto midpoint_index = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (const auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const Vec<N> mid = surface.project_to_surface(0.5 * (mesh.ref_vertices[a] + mesh.ref_vertices[b]), 0.0);
    const int idx = static_cast<int>(out.ref_vertices.size());
    out.ref_vertices.push_back(mid);
    midpoint.emplace(key, idx);
    return idx;
  };
  for (const auto& e : mesh.elements) {
    if constexpr (N == 2) {
      const int m = midpoint_index(e[0], e[1]);
      out.elements.push_back({e[0], m});
      out.elements.push_back({m, e[1]});
    } else {
      const int m01 = midpoint_index(e[0], e[1]);
      const int m12 = midpoint_index(e[1], e[2]);
      const int m20 = midpoint_index(e[2], e[0]);
      out.elements.push_back({e[0], m01, m20});
      out.elements.push_back({m01, e[1], m12});
      out.elements.push_back({m20, m12, e[2]});
      out.elements.push_back({m01, m12, m20});
    }
  }
  return out;
}

template <int N>
SurfaceMesh<N> initial_mesh(const EvolvingSurface<N>& surface, int level) {
  if (level < 0) throw Error("mesh level must be non-negative");
  SurfaceMesh<N> m = detail::base_mesh(surface);
  for (int l = 0; l < level; ++l) m = refine(m, surface);
  return m;
}

// Vertex positions at time t (reference vertices pushed through the flow).
template <int N>
std::vector<Vec<N>> vertices_at(const SurfaceMesh<N>& mesh, const EvolvingSurface<N>& surface, double t) {
  std::vector<Vec<N>> x(mesh.ref_vertices.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = surface.flow_map(mesh.ref_vertices[j], t);
  return x;
}

template <int N>
std::array<Vec<N>, N> element_positions(const SurfaceMesh<N>& mesh, const std::vector<Vec<N>>& positions,
                                        int element) {
  std::array<Vec<N>, N> p{};
  for (int i = 0; i < N; ++i) p[i] = positions[mesh.elements[element][i]];
  return p;
}

// Mesh size h: the largest element diameter over the given evaluation times
// (the mesh breathes with the surface, so h is a property of the whole run).
template <int N>
double mesh_size(const SurfaceMesh<N>& mesh, const EvolvingSurface<N>& surface, std::span<const double> times) {
  double h = 0.0;
  for (const double t : times) {
    const auto x = vertices_at(mesh, surface, t);
    for (int e = 0; e < mesh.element_count(); ++e)
      h = std::max(h, element_diameter<N>(element_positions(mesh, x, e)));
  }
  return h;
}

// True if the mesh is a closed manifold complex: in 3D every (sorted) edge is
// shared by exactly two triangles, in 2D every vertex by exactly two segments.
template <int N>
bool is_closed(const SurfaceMesh<N>& mesh) {
  std::map<std::pair<int, int>, int> facet_count;
  for (const auto& e : mesh.elements) {
    if constexpr (N == 2) {
      ++facet_count[{e[0], e[0]}];
      ++facet_count[{e[1], e[1]}];
    } else {
      ++facet_count[std::minmax(e[0], e[1])];
      ++facet_count[std::minmax(e[1], e[2])];
      ++facet_count[std::minmax(e[2], e[0])];
    }
  }
  return std::all_of(facet_count.begin(), facet_count.end(), [](const auto& kv) { return kv.second == 2; });
}

// OFF-style dump: counts, vertex coordinates, then one index line per element.
template <int N>
void dump_off(std::ostream& os, const SurfaceMesh<N>& mesh, const std::vector<Vec<N>>& positions) {
  os << "OFF\n" << mesh.vertex_count() << ' ' << mesh.element_count() << " 0\n";
  char buf[96];
  for (const auto& v : positions) {
    for (int i = 0; i < N; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      os << (i ? " " : "") << buf;
    }
    os << '\n';
  }
  for (const auto& e : mesh.elements) {
    os << N;
    for (int i = 0; i < N; ++i) os << ' ' << e[i];
    os << '\n';
  }
}

}  // namespace surfmc
