#pragma once

#include <stdexcept>
#include <string>

namespace nestprune {

// Base of every error raised by the library. The CLI maps all of these to
// exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (empty series, NaN metric, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A configuration value is out of its documented range.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed trace or report input. Messages name the offending line when
// one exists.
class FormatError : public Error {
 public:
  using Error::Error;
};

// An operation was requested in a state that does not allow it, e.g. reporting
// a step for a trial that was already pruned.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

// Internal bookkeeping broke an invariant it is supposed to maintain.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nestprune
