#pragma once

#include <stdexcept>
#include <string>

namespace tightcert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension or shape mismatch between operands, layers, or files.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A root or tangent solve with no solution in the requested range.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// Malformed model or dataset file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// The network does not assign the expected label to the unperturbed input.
class MisclassifiedError : public Error {
 public:
  using Error::Error;
};

}  // namespace tightcert
