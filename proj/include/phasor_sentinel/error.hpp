#pragma once

#include <stdexcept>
#include <string>

namespace phasor_sentinel {

/// Bad input: malformed config, schema mismatch, contract violation.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while doing valid work (I/O, solver non-convergence).
/// The CLI maps this to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace phasor_sentinel
