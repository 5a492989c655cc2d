#pragma once

#include <stdexcept>
#include <string>

namespace structcomp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or arguments violate a documented precondition
/// (shape mismatch, index out of range, malformed file).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation reached a state where the objective is undefined,
/// e.g. a zero trace in the SCE loss or a zero-norm row under cosine similarity.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, malformed or unwritable files.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace structcomp
