#pragma once

#include <stdexcept>
#include <string>

namespace sinhp {

/// Input violates an operation's precondition (bad parameters, wrong grid, ...).
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver did not reach its target.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed field or config file.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionError(what);
}

}  // namespace sinhp
