#pragma once

#include <stdexcept>
#include <string>

namespace bevreg {

// Base of every error raised by the library. Callers that only need to know
// "this scene/view failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite input, negative distance, value outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Matrices or lists whose dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Not enough matching pairs to produce the requested number of candidates.
class InsufficientPairs : public Error {
 public:
  using Error::Error;
};

class NoCandidates : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: bad value, unknown key, inconsistent spec.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A documented precondition on the input data was not met.
class ContractError : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bevreg
