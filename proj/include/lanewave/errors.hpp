#pragma once

#include <stdexcept>
#include <string>

namespace lanewave {

/// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Non-finite or otherwise invalid state data was passed to an operation.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// A solver produced NaN/Inf or left its admissible region.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Configuration text or command-line input was rejected.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lanewave
