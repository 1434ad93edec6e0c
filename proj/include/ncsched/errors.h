#pragma once

#include <stdexcept>
#include <string>

namespace ncsched {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that violate a documented precondition (dimensions, capacity,
// schema, admissibility).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A well-posed problem that has no solution at the requested resolution
// (uncertifiable plant, infeasible T-factor problem, no contractive cycle).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Iterations that fail to converge or internal consistency checks that fail.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncsched
