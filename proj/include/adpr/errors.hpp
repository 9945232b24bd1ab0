#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adpr {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact result of an arithmetic operation left the representable range.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Division with a zero divisor.
class DivisionByZero : public Error {
public:
    using Error::Error;
};

/// Argument outside an operation's domain (ln of a non-positive value,
/// non-positive epsilon, sample outside the unit box, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Regression input admits no least-squares solution (n < 2 or zero variance).
class DegenerateData : public Error {
public:
    using Error::Error;
};

/// A failed (bottom) model was passed where a fitted model is required.
class InvalidModel : public Error {
public:
    using Error::Error;
};

/// An operation that needs at least one element received none.
class EmptyInput : public Error {
public:
    using Error::Error;
};

/// Dataset blob bytes violate the declared layout (magic, version, length
/// or digest).
class BlobFormatError : public Error {
public:
    using Error::Error;
};

/// A row-level problem while ingesting tabular data. `row()` is the
/// 1-based data row index (0 for header-level problems).
class IngestError : public Error {
public:
    IngestError(std::size_t row, const std::string& what)
        : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Bad run configuration (unknown backend name, malformed flag value, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace adpr
