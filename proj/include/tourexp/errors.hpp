#pragma once

#include <stdexcept>
#include <string>

namespace tourexp {

/// Base class for all data and usage errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input files.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// Violated preconditions of a numerical operation (rank deficiency,
/// zero variance, too few observations, ...).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

}  // namespace tourexp
