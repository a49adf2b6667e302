#pragma once

#include <stdexcept>
#include <string>

namespace qsle {

// Parameter outside the mathematical domain of an operation (q outside (-1,1),
// p outside (0,1), J below the range where a bound holds, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed call: dimension mismatch, too few samples, bad enum value.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Weighted design matrix too close to rank deficiency for a trustworthy fit.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Request exceeds what an implementation supports (e.g. tensor quadrature in
// high dimension).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid finite-element geometry or a singular assembled system.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsle
