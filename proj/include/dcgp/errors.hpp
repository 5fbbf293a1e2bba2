#pragma once

#include <stdexcept>

namespace dcgp {

/// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Missing, unreadable or invalid input data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a result (e.g. rank-deficient fit).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dcgp
