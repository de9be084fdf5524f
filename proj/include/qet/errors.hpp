#pragma once

#include <stdexcept>
#include <string>

namespace qet {

// Every failure the library raises deliberately goes through Error so the CLI
// can map it to an exit code and a structured JSON diagnostic.
enum class ErrorKind {
  Syntax,     // lexing/parsing, malformed matrix or s-expression
  Type,       // unknown identifier, arity/kind mismatch, duplicate decl
  Dimension,  // register/matrix dimension mismatch, non-unitary matrix
  Overflow,   // int64 arithmetic overflow in a store update
  Cap,        // branch cap / state cap exhausted where truncation is not allowed
  Usage,      // bad CLI invocation or malformed input file
  Internal,   // broken internal invariant (monotonicity violation etc.)
};

struct Error : std::runtime_error {
  ErrorKind kind;
  int line = 0;  // 1-based, 0 when not tied to source text
  int col = 0;

  Error(ErrorKind k, std::string msg, int ln = 0, int co = 0)
      : std::runtime_error(std::move(msg)), kind(k), line(ln), col(co) {}
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Type: return "type";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Cap: return "cap";
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg, int line = 0, int col = 0) {
  throw Error(k, msg, line, col);
}

}  // namespace qet
