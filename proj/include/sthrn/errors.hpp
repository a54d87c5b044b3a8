#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sthrn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class AntipodalInput : public Error {
 public:
  using Error::Error;
};

class DegenerateBone : public Error {
 public:
  using Error::Error;
};

class SequenceTooShort : public Error {
 public:
  using Error::Error;
};

class UnsupportedRate : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class NonScalarRoot : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class NumericDivergence : public Error {
 public:
  NumericDivergence(std::size_t iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace sthrn
