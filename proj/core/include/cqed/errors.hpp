#pragma once

#include <stdexcept>
#include <string>

namespace cqed {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs rejected before any computation starts (bad dimensions, bad
/// parameters, non-unitary mixing, steps that cannot resolve the generator).
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class StepSizeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Failures discovered while a computation is running.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Trace drift beyond the integrator's tolerance.
class IntegrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Population reached the top level of a truncated bosonic mode.
class TruncationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Every measurement channel has (numerically) zero probability.
class DegenerateStateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace cqed
