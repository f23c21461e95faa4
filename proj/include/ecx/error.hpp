#pragma once

#include <stdexcept>
#include <string>

namespace ecx {

// Base class for all library errors. The subclass decides the CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: bad files, unknown codes, violated preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

// Degenerate spectrum, non-convergence, disconnected similarity support.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Files that cannot be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ecx
