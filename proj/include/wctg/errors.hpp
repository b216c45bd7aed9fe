#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wctg {

// Bad or inconsistent input data (corpus files, graph files, unknown ids).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed line in a text input; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Graph file problems that callers may want to tell apart.
class GraphFormatError : public DataError {
 public:
  enum class Kind { version, checksum, truncated, malformed };

  GraphFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Non-finite values, divergence, degenerate normalization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace wctg
