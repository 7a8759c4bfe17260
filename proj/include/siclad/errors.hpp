#pragma once

#include <stdexcept>
#include <string>

namespace siclad {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV ingestion, covariance files).
class ingest_error : public error {
public:
    using error::error;
};

/// Invalid parameters supplied by the caller.
class invalid_argument : public error {
public:
    using error::error;
};

/// Numerical failure or violated internal invariant during inference.
class numerical_error : public error {
public:
    using error::error;
};

/// The test direction vanishes or has zero variance; the hypothesis cannot be tested.
class degenerate_direction : public numerical_error {
public:
    using numerical_error::numerical_error;
};

/// Truncated region carries too little Gaussian mass to form a ratio.
class underflow_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

} // namespace siclad
