#pragma once

#include <string>

#include "qet/syntax.hpp"

namespace qet {

// Parses a program in the quantum while-language. Throws Error{Syntax} with
// 1-based line/column on malformed input. Identifiers containing "__" are
// rejected; that namespace is reserved for names synthesized by macro
// expansion.
Program parse_program(const std::string& text);

}  // namespace qet
