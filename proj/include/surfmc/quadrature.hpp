#pragma once

#include <array>
#include <cmath>

// Reference-element quadrature of polynomial degree >= 4, used for the
// stiffness coefficient, the load and all discrete L2 norms.  Points are in
// barycentric coordinates; weights sum to the reference measure (1 for the
// unit segment, 1/2 for the unit triangle).

namespace surfmc {

template <int N>
struct QuadratureRule {
  static constexpr int point_count = (N == 2) ? 3 : 6;
  static constexpr double reference_measure = (N == 2) ? 1.0 : 0.5;
  std::array<std::array<double, N>, point_count> barycentric{};
  std::array<double, point_count> weights{};
};

template <int N>
const QuadratureRule<N>& reference_quadrature() {
  static const QuadratureRule<N> rule = [] {
    QuadratureRule<N> r;
    if constexpr (N == 2) {
      // 3-point Gauss-Legendre on [0,1] (exact through degree 5).
      const double s = 0.5 * std::sqrt(0.6);
      const double nodes[3] = {0.5 - s, 0.5, 0.5 + s};
      const double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      for (int q = 0; q < 3; ++q) {
        r.barycentric[q] = {1.0 - nodes[q], nodes[q]};
        r.weights[q] = w[q];
      }
    } else {
      // Two-orbit 6-point rule on the unit triangle (exact through degree 4);
      // closed-form node/weight values, evaluated to full double precision.
      const double root10 = std::sqrt(10.0);
      const double root = std::sqrt(38.0 - 44.0 * std::sqrt(0.4));
      const double a[2] = {(8.0 - root10 + root) / 18.0, (8.0 - root10 - root) / 18.0};
      const double wroot = std::sqrt(213125.0 - 53320.0 * root10);
      const double w[2] = {(620.0 + wroot) / 3720.0, (620.0 - wroot) / 3720.0};
      int q = 0;
      for (int g = 0; g < 2; ++g) {
        const double b = 1.0 - 2.0 * a[g];
        const std::array<std::array<double, 3>, 3> orbit = {{{b, a[g], a[g]}, {a[g], b, a[g]}, {a[g], a[g], b}}};
        for (const auto& bc : orbit) {
          r.barycentric[q] = bc;
          r.weights[q] = 0.5 * w[g];  // scale to reference measure 1/2
          ++q;
        }
      }
    }
    return r;
  }();
  return rule;
}

}  // namespace surfmc
