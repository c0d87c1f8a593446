#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "surfmc/dual.hpp"
#include "surfmc/errors.hpp"
#include "surfmc/geometry.hpp"
#include "surfmc/point.hpp"
#include "surfmc/stochastic.hpp"

// Manufactured solutions for the two convergence-study problems and the
// strong-form right-hand side
//
//   f = du/dt(material) + u div_Gamma(v) - div_Gamma(alpha grad_Gamma u)
//
// obtained from the closed-form ambient expressions by forward-mode automatic
// differentiation.  The only analytic inputs are u, alpha, the level set phi
// and the velocity v, each written once as a scalar-generic template; first
// derivatives come from Dual<double,.>, the second derivatives inside the flux
// divergence from nested duals.  Every ingredient (grad phi / |grad phi|, the
// projector P = I - nu nu^T, the flux alpha P grad u) is a smooth ambient
// field near Gamma(t), so the residual can also be evaluated slightly off the
// surface - which is exactly what load assembly on the flat elements needs.

namespace surfmc {

// --- scalar-generic strong-form building blocks ----------------------------

// Material derivative u_t + v . grad u.  `u` is callable as u(x, t) with both
// arguments promoted to the same scalar; `vel` is x-only with t baked in.
template <int N, class UFn, class VelFn>
double material_derivative_of(UFn&& u, VelFn&& vel, const Vec<N>& x, double t) {
  using DJ = Dual<double, N + 1>;  // joint (x, t) seed
  std::array<DJ, N> xj;
  for (int i = 0; i < N; ++i) xj[i] = DJ::seeded(x[i], i);
  const DJ uj = u(xj, DJ::seeded(t, N));
  const Vec<N> v = vel(x);
  double acc = uj.grad[N];
  for (int i = 0; i < N; ++i) acc += v[i] * uj.grad[i];
  return acc;
}

// Surface divergence tr(P grad v) with P built from the level set.
template <int N, class VelFn, class PhiFn>
double tangential_divergence_of(VelFn&& vel, PhiFn&& phi, const Vec<N>& x) {
  const auto x1 = seed_gradient<N>(x);
  const auto v1 = vel(x1);
  const auto p1 = phi(x1);
  Vec<N> nu = p1.grad;
  const double nrm = norm<double, N>(nu);
  if (!(nrm > 1e-300)) throw SingularityError("level-set gradient vanishes in strong-form evaluation");
  nu = (1.0 / nrm) * nu;
  double div = 0.0;
  for (int j = 0; j < N; ++j) div += v1[j].grad[j];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) div -= nu[i] * nu[j] * v1[j].grad[i];
  return div;
}

// div_Gamma(alpha grad_Gamma u) = tr(P grad F) with flux F = alpha P grad u.
// All of u, alpha, phi are x-only scalar-generic callables; second derivatives
// of u (and first of alpha, nu) are carried by nested duals.
template <int N, class UFn, class AlphaFn, class PhiFn>
double tangential_diffusion_of(UFn&& u, AlphaFn&& alpha, PhiFn&& phi, const Vec<N>& x) {
  using D1 = Dual<double, N>;
  const auto x2 = seed_hessian<N>(x);
  const auto u2 = u(x2);
  const auto a2 = alpha(x2);
  const auto p2 = phi(x2);

  // First-order fields as dual numbers: value + ambient gradient.
  const D1 alpha_d = a2.value;
  std::array<D1, N> grad_u, grad_phi;
  for (int k = 0; k < N; ++k) {
    grad_u[k] = u2.grad[k];
    grad_phi[k] = p2.grad[k];
  }
  D1 nrm2 = grad_phi[0] * grad_phi[0];
  for (int k = 1; k < N; ++k) nrm2 = nrm2 + grad_phi[k] * grad_phi[k];
  if (!(nrm2.value > 1e-300)) throw SingularityError("level-set gradient vanishes in strong-form evaluation");
  const D1 nrm = sqrt(nrm2);
  std::array<D1, N> nu;
  for (int k = 0; k < N; ++k) nu[k] = grad_phi[k] / nrm;

  // F_j = alpha (grad u - nu (nu . grad u))_j
  D1 nu_dot_grad = nu[0] * grad_u[0];
  for (int k = 1; k < N; ++k) nu_dot_grad = nu_dot_grad + nu[k] * grad_u[k];
  std::array<D1, N> flux;
  for (int j = 0; j < N; ++j) flux[j] = alpha_d * (grad_u[j] - nu[j] * nu_dot_grad);

  // tr(P grad F) = sum_j dF_j/dx_j - sum_ij nu_i nu_j dF_j/dx_i
  double tr = 0.0;
  for (int j = 0; j < N; ++j) tr += flux[j].grad[j];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) tr -= nu[i].value * nu[j].value * flux[j].grad[i];
  return tr;
}

// Full strong-form residual from the four ambient ingredients.
template <int N, class UFn, class AlphaFn, class PhiFn, class VelFn>
double strong_rhs_of(UFn&& u, AlphaFn&& alpha, PhiFn&& phi, VelFn&& vel, const Vec<N>& x, double t) {
  const double mat = material_derivative_of<N>(u, vel, x, t);
  const double div_v = tangential_divergence_of<N>(vel, phi, x);
  const double u_val = u(x, t);
  auto u_x_only = [&](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    return u(xs, S(t));
  };
  return mat + u_val * div_v - tangential_diffusion_of<N>(u_x_only, alpha, phi, x);
}

// --- the two preset problems ------------------------------------------------

// Moving ellipse, x1^2/(1+sin(t)/4) + x2^2/(1+cos(t)/4) = 1, with
//   u     = sin(t) (cos 3x1 + cos 3x2 + Y1 cos 5x1 + Y2 cos 5x2)
//   alpha = 1 + (Y1/4) sin 2x1 + (Y2/4) sin 2x2
struct EllipseCase {
  static constexpr int ambient = 2;
  static constexpr const char* name = "ellipse2d";
  static constexpr double alpha_min = 0.5;
  static constexpr double alpha_max = 1.5;
  static constexpr int sample_dim = 2;

  template <class S>
  static S axis_a(S t) {
    using std::sin;
    return 1.0 + 0.25 * sin(t);
  }
  template <class S>
  static S axis_b(S t) {
    using std::cos;
    return 1.0 + 0.25 * cos(t);
  }
  template <class S>
  static S level_set(const std::array<S, 2>& x, S t) {
    return x[0] * x[0] / axis_a(t) + x[1] * x[1] / axis_b(t) - 1.0;
  }
  template <class S>
  static std::array<S, 2> velocity(const std::array<S, 2>& x, S t) {
    using std::cos;
    using std::sin;
    return {0.25 * cos(t) / (2.0 * axis_a(t)) * x[0], -0.25 * sin(t) / (2.0 * axis_b(t)) * x[1]};
  }
  template <class S>
  static S solution(const std::array<S, 2>& x, S t, const Sample& y) {
    using std::cos;
    using std::sin;
    return sin(t) * (cos(3.0 * x[0]) + cos(3.0 * x[1]) + y[0] * cos(5.0 * x[0]) + y[1] * cos(5.0 * x[1]));
  }
  template <class S>
  static S coefficient(const std::array<S, 2>& x, S /*t*/, const Sample& y) {
    using std::sin;
    return 1.0 + 0.25 * y[0] * sin(2.0 * x[0]) + 0.25 * y[1] * sin(2.0 * x[1]);
  }
  static double expected_solution(const Vec<2>& x, double t) {
    return std::sin(t) * (std::cos(3.0 * x[0]) + std::cos(3.0 * x[1]));
  }
  static EvolvingSurface<2> surface(double time_horizon = 1.0) { return oscillating_ellipse(time_horizon); }
};

// Moving ellipsoid, x1^2/(1+sin(t)/4) + x2^2 + x3^2 = 1, with
//   u     = sin(t) x1 x2 + Y1 sin(2t) x1^2 + Y2 sin(2t) x2
//   alpha = 1 + x1^2 + Y1 x1^4 + Y2 x2^4
struct EllipsoidCase {
  static constexpr int ambient = 3;
  static constexpr const char* name = "ellipsoid3d";
  static constexpr double alpha_min = 0.0;  // exclusive: alpha > 0 on the admissible set
  static constexpr double alpha_max = 4.8125;
  static constexpr int sample_dim = 2;

  template <class S>
  static S axis_a(S t) {
    using std::sin;
    return 1.0 + 0.25 * sin(t);
  }
  template <class S>
  static S level_set(const std::array<S, 3>& x, S t) {
    return x[0] * x[0] / axis_a(t) + x[1] * x[1] + x[2] * x[2] - 1.0;
  }
  template <class S>
  static std::array<S, 3> velocity(const std::array<S, 3>& x, S t) {
    using std::cos;
    return {0.25 * cos(t) / (2.0 * axis_a(t)) * x[0], S(0.0), S(0.0)};
  }
  template <class S>
  static S solution(const std::array<S, 3>& x, S t, const Sample& y) {
    using std::sin;
    return sin(t) * x[0] * x[1] + y[0] * sin(2.0 * t) * x[0] * x[0] + y[1] * sin(2.0 * t) * x[1];
  }
  template <class S>
  static S coefficient(const std::array<S, 3>& x, S /*t*/, const Sample& y) {
    const S x1sq = x[0] * x[0];
    const S x2sq = x[1] * x[1];
    return 1.0 + x1sq + y[0] * x1sq * x1sq + y[1] * x2sq * x2sq;
  }
  static double expected_solution(const Vec<3>& x, double t) { return std::sin(t) * x[0] * x[1]; }
  static EvolvingSurface<3> surface(double time_horizon = 1.0) { return oscillating_ellipsoid(time_horizon); }
};

// --- preset wrappers ---------------------------------------------------------

// Strong-form residual of a preset case as an ambient field (no on-surface
// check; this is what load assembly on the flat elements evaluates).
template <class Case>
double rhs_ambient(const Vec<Case::ambient>& x, double t, const Sample& y) {
  constexpr int N = Case::ambient;
  auto u = [&y](const auto& xs, auto ts) { return Case::solution(xs, ts, y); };
  auto alpha = [&y, t](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    return Case::coefficient(xs, S(t), y);
  };
  auto phi = [t](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    return Case::level_set(xs, S(t));
  };
  auto vel = [t](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    return Case::velocity(xs, S(t));
  };
  return strong_rhs_of<N>(u, alpha, phi, vel, x, t);
}

// Validated point query: x must lie on Gamma(t) up to level-set tolerance.
template <class Case>
double rhs_f(const Vec<Case::ambient>& x, double t, const Sample& y) {
  if (std::abs(Case::level_set(x, t)) > 1e-10)
    throw OffSurfaceError("rhs_f: point is not on the surface (level set = " +
                          std::to_string(Case::level_set(x, t)) + ")");
  return rhs_ambient<Case>(x, t, y);
}

template <class Case>
double material_derivative(const Vec<Case::ambient>& x, double t, const Sample& y) {
  constexpr int N = Case::ambient;
  auto u = [&y](const auto& xs, auto ts) { return Case::solution(xs, ts, y); };
  auto vel = [t](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    return Case::velocity(xs, S(t));
  };
  return material_derivative_of<N>(u, vel, x, t);
}

template <class Case>
RandomCoefficient<Case::ambient> make_coefficient() {
  RandomCoefficient<Case::ambient> c;
  c.name = Case::name;
  c.evaluate = [](const Vec<Case::ambient>& x, double t, const Sample& y) {
    return Case::coefficient(x, t, y);
  };
  c.alpha_min = Case::alpha_min;
  c.alpha_max = Case::alpha_max;
  c.affine_in_sample = true;
  c.sample_dim = Case::sample_dim;
  return c;
}

// Type-erased bundle consumed by the time stepper and the Monte-Carlo driver.
template <int N>
struct ManufacturedProblem {
  std::string name;
  EvolvingSurface<N> surface;
  RandomCoefficient<N> coefficient;
  std::function<double(const Vec<N>&, double, const Sample&)> rhs;       // ambient strong-form f
  std::function<double(const Vec<N>&, double, const Sample&)> solution;  // exact u
  std::function<double(const Vec<N>&, double)> expected;                 // E[u]
  int sample_dim = 2;
  bool affine_in_sample = false;
};

template <class Case>
ManufacturedProblem<Case::ambient> make_problem(double time_horizon = 1.0) {
  ManufacturedProblem<Case::ambient> p{
      Case::name,
      Case::surface(time_horizon),
      make_coefficient<Case>(),
      [](const Vec<Case::ambient>& x, double t, const Sample& y) { return rhs_ambient<Case>(x, t, y); },
      [](const Vec<Case::ambient>& x, double t, const Sample& y) { return Case::solution(x, t, y); },
      [](const Vec<Case::ambient>& x, double t) { return Case::expected_solution(x, t); },
      Case::sample_dim,
      true};
  return p;
}

}  // namespace surfmc
