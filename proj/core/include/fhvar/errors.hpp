#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fhvar {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed input, or an unmet model precondition.
/// The CLI maps this to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-SPD factorization, quadrature breakdown, and
/// the like. The CLI maps this to exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A Gibbs update hit a degenerate conditional (e.g. a zero scale); the
/// chain cannot continue from such a state.
class DegenerateStateError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Marginal-likelihood quadrature failed to converge for one area.
class QuadratureError : public NumericError {
public:
    QuadratureError(const std::string& what, std::size_t area)
        : NumericError(what), area_index(area) {}

    std::size_t area_index;
};

}  // namespace fhvar
