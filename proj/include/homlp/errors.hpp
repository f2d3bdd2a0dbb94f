#pragma once

#include <stdexcept>
#include <string>

namespace homlp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleBounds : public Error {
 public:
  using Error::Error;
};

class MapMismatch : public Error {
 public:
  using Error::Error;
};

class StackCorruption : public Error {
 public:
  using Error::Error;
};

class UnsupportedMatrixKind : public Error {
 public:
  using Error::Error;
};

/// A pivot of a factorization was zero, negative where it must be positive,
/// or non-finite.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

/// The scalar denominator of the tau step is not positive.
class DegenerateTau : public Error {
 public:
  using Error::Error;
};

class MpsError : public Error {
 public:
  MpsError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class MpsSyntaxError : public MpsError {
 public:
  using MpsError::MpsError;
};

class UnknownRowName : public MpsError {
 public:
  using MpsError::MpsError;
};

class UnsupportedSection : public MpsError {
 public:
  using MpsError::MpsError;
};

}  // namespace homlp
