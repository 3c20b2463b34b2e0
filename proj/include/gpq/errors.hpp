#pragma once

#include <stdexcept>
#include <string>

namespace gpq {

/// Arguments of incompatible sizes (multi-index vs. point, kernel vs. dimension, ...).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy result
/// (singular Gram matrix, non-PD covariance, non-finite integrand).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed experiment or CLI configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gpq
