#pragma once

#include <stdexcept>
#include <string>

namespace conefrac {

// A parameter violates a positivity / convergence condition (e.g. the
// gamma-function condition alpha > (p-1)/2).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix arguments of incompatible dimension.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A matrix failed the strict positive-definiteness test.
class NotPositiveDefinite : public DomainError {
 public:
  using DomainError::DomainError;
};

// A denominator Pochhammer factor (b)_K vanished in a hypergeometric series.
class PoleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A partition weight exceeds the degree cap of a zonal table.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal table failed its build-time consistency check.
class ConstructionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A rejection sampler exhausted its proposal budget.
class EnvelopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An integrand returned NaN/Inf inside its stated support.
class NonfiniteIntegrand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace conefrac
