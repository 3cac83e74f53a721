#pragma once

#include <stdexcept>
#include <string>

namespace coarseconv {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data; carries the 1-based row number of the offending line
// (0 when no specific row applies, e.g. a bad header).
class ParseError : public Error {
 public:
  ParseError(int row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  int row() const { return row_; }

 private:
  int row_;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace coarseconv
