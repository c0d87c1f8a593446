#pragma once

#include <stdexcept>
#include <string>

namespace surfmc {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query outside the surface's time horizon [0, T].
struct TimeDomainError : Error {
  using Error::Error;
};

// Geometric query at a point where the formula degenerates
// (zero level-set gradient, projection of the origin, vanishing axis, ...).
struct SingularityError : Error {
  using Error::Error;
};

// Point query that requires x on Gamma(t) but got one beyond tolerance.
struct OffSurfaceError : Error {
  using Error::Error;
};

// Element with (numerically) vanishing measure.
struct DegenerateElementError : Error {
  using Error::Error;
};

// Diffusion coefficient evaluated <= 0 at a quadrature point.
struct EllipticityError : Error {
  using Error::Error;
};

// Iterative solver hit its iteration limit before reaching the tolerance.
struct SolveError : Error {
  SolveError(const std::string& what, int iterations, double residual)
      : Error(what), iterations(iterations), residual(residual) {}
  int iterations;
  double residual;  // relative residual at abort
};

// Invalid run configuration; carries the offending field name.
struct ConfigError : Error {
  ConfigError(std::string field_name, const std::string& what)
      : Error("config field '" + field_name + "': " + what), field(std::move(field_name)) {}
  std::string field;
};

}  // namespace surfmc
