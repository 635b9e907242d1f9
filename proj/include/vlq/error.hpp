#pragma once

#include <stdexcept>
#include <string>

namespace vlq {

/// Violated precondition, malformed configuration or unknown option.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that ran but could not produce a trustworthy result
/// (non-convergence, NaN, quadrature tolerance missed).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vlq
