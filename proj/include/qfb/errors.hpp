#pragma once

#include <stdexcept>
#include <string>

namespace qfb {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix or operator-count shape mismatch.
struct DimensionError : Error {
    using Error::Error;
};

/// Scalar parameter outside its admissible range, or a non-unitary mixing.
struct ParameterError : Error {
    using Error::Error;
};

/// Input fails a structural contract (e.g. a Kraus set that is not CPTP).
struct ValidationError : Error {
    using Error::Error;
};

/// Work-size guard tripped (e.g. too many outcome sequences to enumerate).
struct ResourceError : Error {
    using Error::Error;
};

/// Malformed channel-spec or result file.
struct ParseError : Error {
    using Error::Error;
};

/// Filesystem failure (open, read, write).
struct IoError : Error {
    using Error::Error;
};

} // namespace qfb
