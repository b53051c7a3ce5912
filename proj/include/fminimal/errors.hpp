#pragma once

#include <stdexcept>
#include <string>

namespace fminimal {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition on an argument was violated (e.g. non-unit vector).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// The weight could not be evaluated at the requested point.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// Tangent space lost rank, or a mesh element collapsed.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// An operation that only makes sense in the Gaussian soliton was handed another space.
class WrongAmbient : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of a bound or an operation does not hold for the input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Malformed mesh file, non-manifold connectivity, etc.
class MeshError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at offset " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace fminimal
