#pragma once

#include <string>

#include "qcf/ir.hpp"

namespace qcf {

struct SourceLocation {
  int line = 1;
  int column = 1;
};

// Parses the __qpu__ kernel language:
//   program := kernel+
//   kernel  := "__qpu__" IDENT "(" "AcceleratorBuffer" IDENT ("," "double" IDENT)* ")" "{" stmt* "}"
//   stmt    := GATE1 INT | "CNOT" INT INT | "SWAP" INT INT | ROT "(" expr ")" INT
//            | "MEASURE" INT "[" INT "]" | IDENT "(" IDENT ("," expr)* ")"
// Statements are newline-terminated; '#' starts a comment.
Program parse(const std::string& source);

// Inlines every CALL reachable from `entry`, substituting callee parameters
// with the call's argument expressions. The result is call-free.
Kernel resolve_calls(const Program& program, const std::string& entry);

}  // namespace qcf
