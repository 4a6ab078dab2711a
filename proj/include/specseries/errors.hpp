#pragma once

#include <stdexcept>

namespace specseries {

/// Invalid arguments: dimension mismatches, out-of-range parameters, empty inputs.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable data and model files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown: degenerate kernels, failed decompositions, zero normalizations.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace specseries
