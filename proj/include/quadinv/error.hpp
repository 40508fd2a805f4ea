#pragma once

#include <stdexcept>
#include <string>

namespace quadinv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// An operation produced NaN or Inf entries.
class NonFiniteError : public Error {
public:
  using Error::Error;
};

/// Random problem construction could not satisfy its constraints.
class GenerationError : public Error {
public:
  using Error::Error;
};

/// The commuting-iterate assumption of the inverse-root update no longer holds.
class CommutatorError : public Error {
public:
  using Error::Error;
};

/// A trace file could not be read, written or parsed.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace quadinv
