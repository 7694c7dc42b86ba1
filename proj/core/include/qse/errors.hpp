#pragma once

#include <stdexcept>

namespace qse {

/// Base class for every failure the library reports on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix sizes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematically valid range.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Request exceeds a configured resource cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Spectrum lacks the structure an operation requires
/// (zero excited level, no strictly lower level below the top, ...).
class DegenerateSpectrumError : public Error {
public:
    using Error::Error;
};

/// Closed-form approximation requested outside its validity regime.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Internal numeric consistency check failed (root bracketing,
/// negative squared density in the interior, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Markov chain could not find an in-domain starting point.
class InitializationError : public Error {
public:
    using Error::Error;
};

/// Statistic requested from too few observations.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Histogram too degenerate to fit.
class FitError : public Error {
public:
    using Error::Error;
};

/// Rejection-sampling envelope violated by an observed density value.
class BoundError : public Error {
public:
    using Error::Error;
};

/// File could not be read or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace qse
