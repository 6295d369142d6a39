#pragma once

#include <stdexcept>
#include <string>

namespace modlab {

// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation fails numerically: non-convergence, overflow,
// blow-up detection, or an unresolvable discretization.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace modlab
