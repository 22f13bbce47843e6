#pragma once

#include <stdexcept>
#include <string>

namespace iegs {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON syntax, wrong types, missing keys).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A well-formed document that violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical routine could not produce a result for the given inputs.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Optimization backend failure or unusable solver outcome.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace iegs
