#pragma once

#include <stdexcept>
#include <string>

namespace mixlab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operands of incompatible dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured size cap was exceeded (atom counts, exhaustive enumeration).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed model or configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixlab
