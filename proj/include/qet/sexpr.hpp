#pragma once

#include <string>
#include <vector>

#include "qet/syntax.hpp"

namespace qet {

// Small s-expression reader shared by the expectation language and the
// invariant/summary sidecar files. Atoms are symbols, numbers (decimals,
// fractions like 8/3, inf), or bracketed complex matrices.
struct SNode {
  enum class Kind { List, Sym, Num, Mat } kind = Kind::List;
  std::vector<SNode> items;
  std::string sym;
  double num = 0.0;
  bool integral = false;
  std::int64_t inum = 0;
  Matrix mat;
  int line = 0, col = 0;

  bool is_sym(const char* s) const { return kind == Kind::Sym && sym == s; }
};

// All top-level forms in the text.
std::vector<SNode> parse_sexprs(const std::string& text);

}  // namespace qet
