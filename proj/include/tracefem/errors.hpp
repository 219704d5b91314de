#pragma once

#include <stdexcept>
#include <string>

namespace tracefem {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs outside the mathematical domain of an operation (x = 0, point
// outside the level-set tube, ...).
struct DomainError : Error {
  using Error::Error;
};

// Invalid or inconsistent run parameters.
struct ConfigError : Error {
  using Error::Error;
};

// Resource guards (refinement level cap).
struct ResourceError : Error {
  using Error::Error;
};

// Degenerate mapped geometry (nonpositive Jacobian, vanishing gradient).
struct GeometryError : Error {
  using Error::Error;
};

// Safeguarded Newton failed to bracket or converge; carries diagnostics.
struct RootFindError : Error {
  using Error::Error;
};

struct AssemblyError : Error {
  using Error::Error;
};

struct SolverError : Error {
  using Error::Error;
};

}  // namespace tracefem
