#pragma once

#include <stdexcept>
#include <string>

namespace clocksync {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfRangeError : Error {
    using Error::Error;
};

struct NonRotationError : Error {
    using Error::Error;
};

struct NotCptpError : Error {
    using Error::Error;
};

struct NotPhaseCovariantError : Error {
    using Error::Error;
};

struct TooManyQubitsError : Error {
    using Error::Error;
};

struct IndexOutOfRangeError : Error {
    using Error::Error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

struct MalformedSpecError : Error {
    using Error::Error;
};

struct DegenerateShotsError : Error {
    using Error::Error;
};

struct FlatFringeError : Error {
    using Error::Error;
};

// Config-file / flag parsing failures (bad syntax, unknown or missing keys).
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace clocksync
