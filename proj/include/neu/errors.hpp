#pragma once

#include <stdexcept>
#include <string>

namespace neu {

/// Input outside the mathematical domain of an operation (bad dimension,
/// non-finite coordinate, non-skew generator, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A reconfiguration parameter does not define an invertible map.
class InvertibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method exhausted its budget before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or unusable configuration (empty grid, bad flag combination).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every candidate produced a non-finite loss.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Constructive routine (path finding, chain building) failed.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: singular systems, indefinite kernels, rank loss.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace neu
