#pragma once

#include <stdexcept>
#include <string>

namespace rwtn {

/// Shape/arity disagreement between numeric operands.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration or dataset specification.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent data files.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative numeric routine failed to converge within its cap.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear system has no unique solution.
struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rwtn
