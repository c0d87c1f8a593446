#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "surfmc/errors.hpp"
#include "surfmc/point.hpp"

// Evolving closed hypersurfaces Gamma(t) in R^N (curves for N=2, surfaces for
// N=3).  The built-in family are axis-scaled ellipses/ellipsoids
//
//   Gamma(t) = { x : sum_i x_i^2 / a_i(t) = 1 },
//
// moved by the coordinate-wise scaling flow Phi_t(x)_i = x_i sqrt(a_i(t)/a_i(0)),
// whose material velocity is v_i(x,t) = a_i'(t) / (2 a_i(t)) * x_i.  Arbitrary
// star-shaped (w.r.t. the origin) surfaces can be supplied through callbacks.

namespace surfmc {

template <int N>
class EvolvingSurface {
 public:
  static_assert(N == 2 || N == 3, "ambient dimension must be 2 or 3");
  using Point = Vec<N>;

  // One scaling axis: a(t) and its time derivative.
  struct Axis {
    std::function<double(double)> value;
    std::function<double(double)> rate;
  };

  using LevelSetFn = std::function<double(const Point&, double)>;
  using FlowFn = std::function<Point(const Point&, double)>;
  using VelocityFn = std::function<Point(const Point&, double)>;

  static EvolvingSurface scaling(std::array<Axis, N> axes, double time_horizon) {
    EvolvingSurface s(time_horizon);
    s.axes_ = std::move(axes);
    s.is_scaling_ = true;
    return s;
  }

  // Custom surface from callbacks.  The level set must be star-shaped with
  // respect to the origin (project_to_surface walks along rays from 0).
  static EvolvingSurface custom(LevelSetFn level_set, FlowFn flow, VelocityFn velocity,
                                double time_horizon) {
    EvolvingSurface s(time_horizon);
    s.level_set_ = std::move(level_set);
    s.flow_ = std::move(flow);
    s.velocity_ = std::move(velocity);
    s.is_scaling_ = false;
    return s;
  }

  double time_horizon() const { return time_horizon_; }
  bool is_scaling() const { return is_scaling_; }

  // Scaled axis value a_i(t); scaling surfaces only.
  double axis_value(int i, double t) const {
    const double a = axes_[i].value(t);
    if (!(a > 0.0)) throw SingularityError("axis " + std::to_string(i) + " degenerates at t=" + std::to_string(t));
    return a;
  }

  // Position at time t of the material point that sits at x0 on Gamma(0).
  Point flow_map(const Point& x0, double t) const {
    require_time(t);
    if (!is_scaling_) return flow_(x0, t);
    Point x{};
    for (int i = 0; i < N; ++i) x[i] = x0[i] * std::sqrt(axis_value(i, t) / axis_value(i, 0.0));
    return x;
  }

  // Material velocity at x in Gamma(t).
  Point velocity(const Point& x, double t) const {
    require_time(t);
    if (!is_scaling_) return velocity_(x, t);
    Point v{};
    for (int i = 0; i < N; ++i) v[i] = 0.5 * axes_[i].rate(t) / axis_value(i, t) * x[i];
    return v;
  }

  // Level-set value phi(x, t); zero on Gamma(t), negative inside.
  double level_set(const Point& x, double t) const {
    require_time(t);
    if (!is_scaling_) return level_set_(x, t);
    double s = -1.0;
    for (int i = 0; i < N; ++i) s += x[i] * x[i] / axis_value(i, t);
    return s;
  }

  // Outward unit normal nu = grad phi / |grad phi|.
  Point unit_normal(const Point& x, double t) const {
    require_time(t);
    Point g = level_set_gradient(x, t);
    const double n = norm<double, N>(g);
    if (!(n > 1e-300)) throw SingularityError("level-set gradient vanishes; normal undefined");
    return (1.0 / n) * g;
  }

  // Tangential projector P = I - nu nu^T.
  Mat<N> tangent_projector(const Point& x, double t) const {
    const Point nu = unit_normal(x, t);
    Mat<N> p{};
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) p[i][j] = (i == j ? 1.0 : 0.0) - nu[i] * nu[j];
    return p;
  }

  // Surface divergence of the material velocity, div_Gamma v = tr(P grad v).
  // This is the dilation rate that enters the conservation law.
  double tangential_divergence_velocity(const Point& x, double t) const {
    require_time(t);
    if (is_scaling_) {
      // grad v is diagonal with entries c_i = a_i'/(2 a_i), so
      // tr(P grad v) = sum_i c_i (1 - nu_i^2).
      const Point nu = unit_normal(x, t);
      double div = 0.0;
      for (int i = 0; i < N; ++i) {
        const double ci = 0.5 * axes_[i].rate(t) / axis_value(i, t);
        div += ci * (1.0 - nu[i] * nu[i]);
      }
      return div;
    }
    // Custom surfaces: central differences of the velocity callback.
    const Mat<N> p = tangent_projector(x, t);
    const double h = 1e-6 * (1.0 + max_abs<N>(x));
    double div = 0.0;
    for (int i = 0; i < N; ++i) {
      Point xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const Point vp = velocity_(xp, t), vm = velocity_(xm, t);
      for (int j = 0; j < N; ++j) div += p[i][j] * (vp[j] - vm[j]) / (2.0 * h);
    }
    return div;
  }

  // Closest-point-style projection onto Gamma(t) along the ray from the
  // origin.  Exact for the scaling family; bisection on the level set
  // otherwise.
  Point project_to_surface(const Point& x, double t) const {
    require_time(t);
    if (norm<double, N>(x) < 1e-300) throw SingularityError("cannot project the origin to the surface");
    if (is_scaling_) {
      double q = 0.0;
      for (int i = 0; i < N; ++i) q += x[i] * x[i] / axis_value(i, t);
      return (1.0 / std::sqrt(q)) * x;
    }
    return project_along_ray(x, t);
  }

 private:
  explicit EvolvingSurface(double time_horizon) : time_horizon_(time_horizon) {}

  void require_time(double t) const {
    if (t < -1e-12 || t > time_horizon_ + 1e-12)
      throw TimeDomainError("t=" + std::to_string(t) + " outside [0, " + std::to_string(time_horizon_) + "]");
  }

  Point level_set_gradient(const Point& x, double t) const {
    Point g{};
    if (is_scaling_) {
      for (int i = 0; i < N; ++i) g[i] = 2.0 * x[i] / axis_value(i, t);
      return g;
    }
    const double h = 1e-6 * (1.0 + max_abs<N>(x));
    for (int i = 0; i < N; ++i) {
      Point xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (level_set_(xp, t) - level_set_(xm, t)) / (2.0 * h);
    }
    return g;
  }

  Point project_along_ray(const Point& x, double t) const {
    const auto value = [&](double s) { return level_set_(s * x, t); };
    double lo = 1.0, hi = 1.0;
    double flo = value(lo), fhi = flo;
    // Expand the bracket geometrically until the level set changes sign.
    for (int k = 0; k < 80 && flo * fhi >= 0.0; ++k) {
      lo *= 0.5;
      hi *= 2.0;
      flo = value(lo);
      fhi = value(hi);
    }
    if (flo * fhi > 0.0) throw SingularityError("projection ray does not cross the surface");
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      const double fm = value(mid);
      if (flo * fm <= 0.0) {
        hi = mid;
      } else {
        lo = mid;
        flo = fm;
      }
    }
    return 0.5 * (lo + hi) * x;
  }

  double time_horizon_;
  bool is_scaling_ = false;
  std::array<Axis, N> axes_{};
  LevelSetFn level_set_;
  FlowFn flow_;
  VelocityFn velocity_;
};

// --- preset surfaces -------------------------------------------------------

// Curve: x1^2/(1 + sin(t)/4) + x2^2/(1 + cos(t)/4) = 1.
inline EvolvingSurface<2> oscillating_ellipse(double time_horizon = 1.0) {
  using A = EvolvingSurface<2>::Axis;
  return EvolvingSurface<2>::scaling(
      {A{[](double t) { return 1.0 + 0.25 * std::sin(t); }, [](double t) { return 0.25 * std::cos(t); }},
       A{[](double t) { return 1.0 + 0.25 * std::cos(t); }, [](double t) { return -0.25 * std::sin(t); }}},
      time_horizon);
}

// Surface: x1^2/(1 + sin(t)/4) + x2^2 + x3^2 = 1.
inline EvolvingSurface<3> oscillating_ellipsoid(double time_horizon = 1.0) {
  using A = EvolvingSurface<3>::Axis;
  const A unit{[](double) { return 1.0; }, [](double) { return 0.0; }};
  return EvolvingSurface<3>::scaling(
      {A{[](double t) { return 1.0 + 0.25 * std::sin(t); }, [](double t) { return 0.25 * std::cos(t); }}, unit,
       unit},
      time_horizon);
}

// Static unit circle / sphere (handy in tests).
inline EvolvingSurface<2> unit_circle(double time_horizon = 1.0) {
  using A = EvolvingSurface<2>::Axis;
  const A unit{[](double) { return 1.0; }, [](double) { return 0.0; }};
  return EvolvingSurface<2>::scaling({unit, unit}, time_horizon);
}

inline EvolvingSurface<3> unit_sphere(double time_horizon = 1.0) {
  using A = EvolvingSurface<3>::Axis;
  const A unit{[](double) { return 1.0; }, [](double) { return 0.0; }};
  return EvolvingSurface<3>::scaling({unit, unit, unit}, time_horizon);
}

}  // namespace surfmc
