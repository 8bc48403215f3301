// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace rcp {

// Iterative solver failed to converge (bisection, bracketing, tilting).
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace rcp
