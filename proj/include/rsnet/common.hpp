#pragma once

#include <stdexcept>
#include <string>

namespace rsnet {

inline constexpr const char* kVersion = "0.1.0";

// Bad inputs: malformed files, invalid shapes, broken preconditions.
// The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures: non-convergence, singular systems, NaN mid-run.
// The CLI maps these to exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rsnet
