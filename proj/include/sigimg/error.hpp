#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigimg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV, manifest). Carries the 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& where, std::size_t line, const std::string& what)
      : Error(where + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Dimension or layout mismatch between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message always names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sigimg
