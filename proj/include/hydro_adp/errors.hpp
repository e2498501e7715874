#pragma once

#include <stdexcept>
#include <string>

namespace hydro_adp {

/// Caller broke a documented precondition (dimension mismatch, non-finite input, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A configuration file or parameter set is unusable.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A data file could not be parsed; the message names the offending row/column.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The optimization model failed numerically (infeasible stage, solver breakdown).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hydro_adp
