#pragma once

#include <stdexcept>
#include <string>

namespace dnls {

/// Overflow, NaN or a failed convergence inside a numerical kernel.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input violates a structural hypothesis (genericity, single eigenvalue, ...).
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dnls
