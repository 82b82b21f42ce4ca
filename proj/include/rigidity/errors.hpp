#pragma once

#include <stdexcept>
#include <string>

namespace rigidity {

// Raised when an argument lies outside the regime an operation supports
// (librating energies, flat-region cohomology classes, m >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// No energy split with all axes rotating above the margin exists.
class InfeasibleResonance : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed scenario or potential documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rigidity
