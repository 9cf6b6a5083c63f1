#pragma once

#include <stdexcept>
#include <string>

namespace jumplab {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too few intraday returns for the requested measure.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (prices, CSV records, configuration).
class DataError : public Error {
public:
    using Error::Error;
};

/// Argument outside its admissible domain.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace jumplab
