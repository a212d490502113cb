#pragma once

#include <stdexcept>
#include <string>

namespace ergocert {

/// Base class of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (bad matrix, bad pmf, parameter outside its domain).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A hypothesis required by a bound does not hold (C1, H1/H2 extraction, class membership).
class ConditionFailure : public Error {
 public:
  using Error::Error;
};

/// A value left the representable range of the extended-exponent arithmetic.
class NumericOverflow : public Error {
 public:
  using Error::Error;
};

/// A convolution exceeded the support cap and the caller did not ask for a truncation report.
class TruncationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ergocert
