#pragma once

#include <stdexcept>
#include <string>

namespace ifl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside an operation's domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Input text (CSV, config) could not be parsed.
class MalformedInput : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a data invariant (NaN cells, single class, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ifl
