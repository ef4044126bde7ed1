#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtmlab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed machine text or amplitude literal; carries a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        detail_(what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  /// The message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed text that violates a machine invariant (unknown state, bad probability sum, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A configured bound (support size, branch count, state cap) was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// An operation was applied to data of the wrong shape (missing rule row, empty state, kind mismatch).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition did not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A lossy float conversion fell outside the double range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class NotAMachineCode : public Error {
 public:
  NotAMachineCode() : Error("not a machine code") {}
  explicit NotAMachineCode(const std::string& detail) : Error("not a machine code: " + detail) {}
};

}  // namespace qtmlab
