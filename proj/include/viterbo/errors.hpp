#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace viterbo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `offset` is the byte position of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Unbound variable or division by zero during evaluation.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Input that violates an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedure that did not converge (branch tracking, Newton, ...).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace viterbo
