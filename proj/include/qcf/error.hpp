#pragma once

#include <stdexcept>
#include <string>

namespace qcf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lexical or syntactic failure with a 1-based source position.
struct ParseError : Error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_)
      : Error(msg + " at line " + std::to_string(line_) + ", column " +
              std::to_string(column_)),
        line(line_),
        column(column_) {}
};

// Structurally well-formed input that violates an IR invariant.
struct ValidationError : Error {
  using Error::Error;
};

struct NotFoundError : Error {
  using Error::Error;
};

struct TransportError : Error {
  using Error::Error;
};

}  // namespace qcf
