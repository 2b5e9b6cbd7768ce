#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tragraph {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Cross-reference between records that does not resolve.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Binary or raster file with an unsupported or truncated layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise invalid numeric state.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Geometric configuration with no well-defined answer.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tragraph
