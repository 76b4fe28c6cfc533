#pragma once

#include <stdexcept>
#include <string>

namespace behavtrace {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a contract (malformed record, unmapped behavior,
/// degenerate sample). The CLI maps this to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters or configuration. The CLI maps this to exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File-system failures. The CLI maps this to exit code 1.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace behavtrace
