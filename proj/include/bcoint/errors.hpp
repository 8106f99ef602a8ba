#pragma once

#include <stdexcept>
#include <string>

namespace bcoint {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract input (lengths, non-finite values, bad config).
class InputError : public Error {
public:
    using Error::Error;
};

// A computation could not be completed: degenerate statistics, singular
// systems, quadrature that did not meet tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace bcoint
