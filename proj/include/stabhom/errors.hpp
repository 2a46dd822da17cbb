#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stabhom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand widths or dimensions do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A size limit (qubit count, setting count, search space) was exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// An argument violates a documented precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at column " + std::to_string(position + 1)), reason_(message), position_(position) {}
  // Location in a multi-line source: 1-based line and column.
  ParseError(const std::string& message, std::size_t position, int line, int column)
      : Error(message + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        reason_(message),
        position_(position),
        line_(line) {}

  const std::string& reason() const noexcept { return reason_; }
  std::size_t position() const noexcept { return position_; }
  int line() const noexcept { return line_; }  // 0 when unknown

 private:
  std::string reason_;
  std::size_t position_;
  int line_ = 0;
};

}  // namespace stabhom
