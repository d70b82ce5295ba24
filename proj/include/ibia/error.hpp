#pragma once

#include <stdexcept>
#include <string>

namespace ibia {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model or evidence input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Bad arguments to an operation (unknown variable, state out of range, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A clique-size bound cannot be met.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Division x/0 with x > 0, or beliefs that disagree beyond tolerance.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was broken. Always a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Raised by oracles when the state space exceeds the configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace ibia
