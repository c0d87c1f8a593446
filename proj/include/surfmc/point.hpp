#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

// Small fixed-size point/vector helpers, templated on the scalar so the same
// formulas run on double and on dual numbers (see dual.hpp).  The free
// functions deduce the extent as std::size_t (the kind std::array carries);
// call sites may still name it with int template arguments.

namespace surfmc {

// The aliases take int extents (matching the library-wide `int N` dimension
// parameter) and cast inside, which also keeps them out of template argument
// deduction: N is always pinned by a class-template argument or given
// explicitly, never guessed from a bare std::array.
template <class S, int N>
using PointT = std::array<S, static_cast<std::size_t>(N)>;

template <int N>
using Vec = std::array<double, static_cast<std::size_t>(N)>;

template <int N>
using Mat = std::array<Vec<N>, static_cast<std::size_t>(N)>;

template <class S, std::size_t N>
constexpr S dot(const std::array<S, N>& a, const std::array<S, N>& b) {
  S s = a[0] * b[0];
  for (std::size_t i = 1; i < N; ++i) s = s + a[i] * b[i];
  return s;
}

template <class S, std::size_t N>
constexpr std::array<S, N> operator+(const std::array<S, N>& a, const std::array<S, N>& b) {
  std::array<S, N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}

template <class S, std::size_t N>
constexpr std::array<S, N> operator-(const std::array<S, N>& a, const std::array<S, N>& b) {
  std::array<S, N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <class S, std::size_t N>
constexpr std::array<S, N> operator*(double c, const std::array<S, N>& a) {
  std::array<S, N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = c * a[i];
  return r;
}

template <class S, std::size_t N>
S norm(const std::array<S, N>& a) {
  using std::sqrt;
  return sqrt(dot<S, N>(a, a));
}

template <std::size_t N>
double distance(const Vec<N>& a, const Vec<N>& b) {
  return norm<double, N>(a - b);
}

inline Vec<3> cross(const Vec<3>& a, const Vec<3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Largest absolute coordinate; used for scale-aware degeneracy thresholds.
template <std::size_t N>
double max_abs(const Vec<N>& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

}  // namespace surfmc
