#pragma once

#include <array>
#include <cmath>

// Forward-mode dual numbers with a fixed number of directions.
//
// Dual<double, N> carries a value and its gradient with respect to N seeds;
// nesting the template (Dual<Dual<double, N>, N>) propagates second
// derivatives, which is what the strong-form residual assembly needs for the
// surface divergence of the diffusive flux.  Only the functions the closed-form
// solution/coefficient/level-set expressions actually use are overloaded.

namespace surfmc {

template <class T, int N>
struct Dual {
  T value{};
  std::array<T, N> grad{};

  constexpr Dual() = default;
  constexpr Dual(double v) : value(v) {}  // constant (zero gradient), nests recursively
  constexpr Dual(T v, std::array<T, N> g) : value(std::move(v)), grad(std::move(g)) {}

  // Constant with the given (possibly dual-valued) payload.
  static constexpr Dual constant(T v) {
    Dual d;
    d.value = std::move(v);
    return d;
  }
  // Independent variable in direction `slot`.
  static constexpr Dual seeded(T v, int slot) {
    Dual d;
    d.value = std::move(v);
    d.grad[slot] = T(1.0);
    return d;
  }
};

template <class T, int N>
constexpr Dual<T, N> operator+(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.value = a.value + b.value;
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] + b.grad[i];
  return r;
}

template <class T, int N>
constexpr Dual<T, N> operator-(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.value = a.value - b.value;
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] - b.grad[i];
  return r;
}

template <class T, int N>
constexpr Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.value = -a.value;
  for (int i = 0; i < N; ++i) r.grad[i] = -a.grad[i];
  return r;
}

template <class T, int N>
constexpr Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.value = a.value * b.value;
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
  return r;
}

template <class T, int N>
constexpr Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.value = a.value / b.value;
  const T inv2 = T(1.0) / (b.value * b.value);
  for (int i = 0; i < N; ++i) r.grad[i] = (a.grad[i] * b.value - a.value * b.grad[i]) * inv2;
  return r;
}

// double <-> Dual mixed forms (avoid materialising zero-gradient temporaries).
template <class T, int N>
constexpr Dual<T, N> operator+(const Dual<T, N>& a, double c) {
  Dual<T, N> r = a;
  r.value = a.value + c;
  return r;
}
template <class T, int N>
constexpr Dual<T, N> operator+(double c, const Dual<T, N>& a) { return a + c; }

template <class T, int N>
constexpr Dual<T, N> operator-(const Dual<T, N>& a, double c) { return a + (-c); }
template <class T, int N>
constexpr Dual<T, N> operator-(double c, const Dual<T, N>& a) {
  Dual<T, N> r = -a;
  r.value = c - a.value;
  return r;
}

template <class T, int N>
constexpr Dual<T, N> operator*(const Dual<T, N>& a, double c) {
  Dual<T, N> r;
  r.value = a.value * c;
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] * c;
  return r;
}
template <class T, int N>
constexpr Dual<T, N> operator*(double c, const Dual<T, N>& a) { return a * c; }

template <class T, int N>
constexpr Dual<T, N> operator/(const Dual<T, N>& a, double c) { return a * (1.0 / c); }
template <class T, int N>
constexpr Dual<T, N> operator/(double c, const Dual<T, N>& a) {
  return Dual<T, N>(c) / a;
}

template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
  using std::cos;
  using std::sin;
  Dual<T, N> r;
  r.value = sin(a.value);
  const T c = cos(a.value);
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] * c;
  return r;
}

template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
  using std::cos;
  using std::sin;
  Dual<T, N> r;
  r.value = cos(a.value);
  const T ms = -sin(a.value);
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] * ms;
  return r;
}

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  using std::sqrt;
  Dual<T, N> r;
  r.value = sqrt(a.value);
  const T half_inv = T(0.5) / r.value;
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] * half_inv;
  return r;
}

template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
  using std::exp;
  Dual<T, N> r;
  r.value = exp(a.value);
  for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] * r.value;
  return r;
}

// --- helpers for seeding ambient points -----------------------------------

// First-order duals: X_i = x_i seeded in direction i.
template <int N>
std::array<Dual<double, N>, N> seed_gradient(const std::array<double, N>& x) {
  std::array<Dual<double, N>, N> X;
  for (int i = 0; i < N; ++i) X[i] = Dual<double, N>::seeded(x[i], i);
  return X;
}

// Second-order nested duals: value-level and outer-level both seeded, so a
// function evaluation yields value, gradient and Hessian.
template <int N>
using Dual2 = Dual<Dual<double, N>, N>;

template <int N>
std::array<Dual2<N>, N> seed_hessian(const std::array<double, N>& x) {
  std::array<Dual2<N>, N> X;
  for (int i = 0; i < N; ++i) {
    X[i].value = Dual<double, N>::seeded(x[i], i);
    X[i].grad[i] = Dual<double, N>(1.0);
  }
  return X;
}

}  // namespace surfmc
