#pragma once

#include <stdexcept>
#include <string>

namespace drsl {

/// Base class for all library errors. Each subclass maps to one CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration (exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed input files or invariant violations in loaded data (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failure inside an estimator (exit code 4).
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace drsl
