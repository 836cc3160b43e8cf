#pragma once

#include <stdexcept>
#include <string>

namespace closure {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown variable name or alphabet symbol.
class NameError : public Error {
public:
    using Error::Error;
};

/// Two distributions (or blocks) declare the same variable name.
class NameCollisionError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input used in an invalid way (empty group, overlap, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Conditioning on an event of probability zero.
class NullEventError : public Error {
public:
    using Error::Error;
};

/// Malformed file or mismatched table shape.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Configured horizon or table-size limit exceeded.
class LimitError : public Error {
public:
    using Error::Error;
};

/// A factored kernel view was requested from a flat-authored scenario.
class UnsupportedViewError : public Error {
public:
    using Error::Error;
};

}  // namespace closure
