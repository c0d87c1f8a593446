#pragma once

#include <cmath>

#include "surfmc/fem.hpp"
#include "surfmc/manufactured.hpp"

// Independent evaluators used to validate the AD-driven strong-form residual:
// a central-finite-difference version of the same composite expression, and a
// weak-residual load assembly that never touches second derivatives.  Both are
// debug/validation oracles, not production paths.

namespace surfmc {

namespace fd {

// Central-difference gradient of an x-only scalar field.
template <int N, class Fn>
Vec<N> gradient(Fn&& g, const Vec<N>& x, double step) {
  Vec<N> out{};
  for (int i = 0; i < N; ++i) {
    Vec<N> xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    out[i] = (g(xp) - g(xm)) / (2.0 * step);
  }
  return out;
}

template <int N, class Fn>
Vec<N> unit_normal(Fn&& phi, const Vec<N>& x, double step) {
  Vec<N> nu = gradient<N>(phi, x, step);
  return (1.0 / norm<double, N>(nu)) * nu;
}

}  // namespace fd

// Material derivative u_t + v . grad u by central differences (step 1e-5).
template <class Case>
double material_derivative_fd(const Vec<Case::ambient>& x, double t, const Sample& y, double step = 1e-5) {
  constexpr int N = Case::ambient;
  const double ut = (Case::solution(x, t + step, y) - Case::solution(x, t - step, y)) / (2.0 * step);
  const Vec<N> gu = fd::gradient<N>([&](const Vec<N>& z) { return Case::solution(z, t, y); }, x, step);
  const Vec<N> v = Case::velocity(x, t);
  return ut + dot<double, N>(v, gu);
}

// Full strong-form residual by central differences of the same composite
// ambient expression the AD path evaluates.  First derivatives use
// `inner_step` (1e-5, as small as double precision allows); the outer
// differences of the flux field use a larger `outer_step` because nested
// central differences amplify the inner rounding noise by 1/step - with both
// steps at 1e-5 the oracle would bottom out near 1e-6 absolute, right at the
// comparison tolerance.
template <class Case>
double rhs_ambient_fd(const Vec<Case::ambient>& x, double t, const Sample& y, double inner_step = 1e-5,
                      double outer_step = 1e-4) {
  constexpr int N = Case::ambient;
  const auto u_at = [&](const Vec<N>& z) { return Case::solution(z, t, y); };
  const auto alpha_at = [&](const Vec<N>& z) { return Case::coefficient(z, t, y); };
  const auto phi_at = [&](const Vec<N>& z) { return Case::level_set(z, t); };

  const double mat = material_derivative_fd<Case>(x, t, y, inner_step);

  // u * div_Gamma v,  div_Gamma v = tr(P grad v) with everything differenced.
  const Vec<N> nu = fd::unit_normal<N>(phi_at, x, inner_step);
  double div_v = 0.0;
  for (int i = 0; i < N; ++i) {
    Vec<N> xp = x, xm = x;
    xp[i] += inner_step;
    xm[i] -= inner_step;
    const Vec<N> vp = Case::velocity(xp, t), vm = Case::velocity(xm, t);
    for (int j = 0; j < N; ++j) {
      const double dvj = (vp[j] - vm[j]) / (2.0 * inner_step);
      div_v += ((i == j ? 1.0 : 0.0) - nu[i] * nu[j]) * dvj;
    }
  }

  // Flux field G(z) = alpha(z) P(z) grad u(z), inner derivatives differenced.
  const auto flux = [&](const Vec<N>& z) {
    const Vec<N> gu = fd::gradient<N>(u_at, z, inner_step);
    const Vec<N> nz = fd::unit_normal<N>(phi_at, z, inner_step);
    const double a = alpha_at(z);
    const double ng = dot<double, N>(nz, gu);
    Vec<N> g{};
    for (int j = 0; j < N; ++j) g[j] = a * (gu[j] - nz[j] * ng);
    return g;
  };
  double div_flux = 0.0;
  for (int i = 0; i < N; ++i) {
    Vec<N> xp = x, xm = x;
    xp[i] += outer_step;
    xm[i] -= outer_step;
    const Vec<N> gp = flux(xp), gm = flux(xm);
    for (int j = 0; j < N; ++j) {
      const double dgj = (gp[j] - gm[j]) / (2.0 * outer_step);
      div_flux += ((i == j ? 1.0 : 0.0) - nu[i] * nu[j]) * dgj;
    }
  }

  return mat + u_at(x) * div_v - div_flux;
}

// Weak-residual load: moves the flux divergence onto the test functions,
//   F_j = int (du_material + u div_Gamma v) chi_j + int alpha grad_Gamma u . grad chi_j,
// so only first derivatives of u appear.  Agrees with the strong-form load up
// to the O(h^2) geometric consistency error of the flat elements.
template <class Case>
Vector assemble_load_weak(const GeometryCache<Case::ambient>& cache, double t, const Sample& y) {
  constexpr int N = Case::ambient;
  const auto& rule = reference_quadrature<N>();
  Vector out(cache.vertex_count(), 0.0);
  auto u_xt = [&y](const auto& xs, auto ts) { return Case::solution(xs, ts, y); };
  auto vel = [t](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    return Case::velocity(xs, S(t));
  };
  auto phi = [t](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    return Case::level_set(xs, S(t));
  };
  for (int e = 0; e < cache.element_count(); ++e) {
    const auto& el = cache.mesh->elements[e];
    const auto& frame = cache.frames[e];
    const double scale = frame.measure / rule.reference_measure;
    for (int q = 0; q < rule.point_count; ++q) {
      const Vec<N>& xq = cache.qpoints[e][q];
      const double w = rule.weights[q] * scale;
      const double mass_part = material_derivative_of<N>(u_xt, [&](const Vec<N>& z) { return Case::velocity(z, t); },
                                                         xq, t) +
                               Case::solution(xq, t, y) * tangential_divergence_of<N>(vel, phi, xq);
      // alpha (P grad u) at the quadrature point
      const auto x1 = seed_gradient<N>(xq);
      const auto u1 = u_xt(x1, Dual<double, N>(t));
      const auto p1 = phi(x1);
      Vec<N> gu{}, nu{};
      for (int i = 0; i < N; ++i) {
        gu[i] = u1.grad[i];
        nu[i] = p1.grad[i];
      }
      nu = (1.0 / norm<double, N>(nu)) * nu;
      const double ng = dot<double, N>(nu, gu);
      Vec<N> pgrad{};
      for (int i = 0; i < N; ++i) pgrad[i] = gu[i] - nu[i] * ng;
      const double a = Case::coefficient(xq, t, y);
      for (int i = 0; i < N; ++i)
        out[el[i]] += w * (mass_part * rule.barycentric[q][i] + a * dot<double, N>(pgrad, frame.basis_gradients[i]));
    }
  }
  return out;
}

}  // namespace surfmc
