#pragma once

#include <stdexcept>
#include <string>

namespace ssfgnet {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An index (edge endpoint, class label, segment id) is out of range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// A configuration value violates its documented invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A caller broke a precondition that is not about shapes or indices.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but degenerate for the requested computation.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace ssfgnet
