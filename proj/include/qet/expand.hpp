#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "qet/syntax.hpp"

namespace qet {

// Variable layout of a validated program: declaration-ordered classical
// variables and quantum registers. Store vectors and amplitude indices are
// laid out against this table.
struct VarTable {
  std::vector<std::string> bools;
  std::vector<std::string> ints;
  std::vector<std::string> regs;
  std::vector<int> dims;             // per register, >= 2
  std::vector<std::int64_t> strides; // per register, row-major (first register most significant)
  std::int64_t total_dim = 1;

  std::unordered_map<std::string, int> bool_idx, int_idx, reg_idx;

  int find_bool(const std::string& n) const {
    auto it = bool_idx.find(n);
    return it == bool_idx.end() ? -1 : it->second;
  }
  int find_int(const std::string& n) const {
    auto it = int_idx.find(n);
    return it == int_idx.end() ? -1 : it->second;
  }
  int find_reg(const std::string& n) const {
    auto it = reg_idx.find(n);
    return it == reg_idx.end() ? -1 : it->second;
  }
};

// Inlines procedure calls and desugars |0>/|+> preparations. Parameters are
// substituted by the call-site arguments; proc-body variables that are
// declared at top level stay shared, while undeclared ones become implicit
// locals: each call site gets fresh "name__k" copies whose declarations are
// synthesized from usage (measure source / prep target -> qreg[2], measure
// result or boolean assignment -> bool, arithmetic assignment -> int).
// Recursive calls are an error. The result contains no Call/PrepZero/PrepPlus
// nodes and no procs.
Program expand_macros(const Program& p);

// Checks declarations (no duplicates, register dims >= 2), resolves every
// identifier against the layout, type-checks statements and expressions,
// verifies gate arities/dimensions and unitarity of matrix literals within
// 1e-9, and checks @summary label uniqueness. Fills the `resolved` caches in
// the AST. Works on expanded or unexpanded programs (Call arguments are
// checked against the proc's arity only).
VarTable validate(const Program& p);

// parse + expand + validate in one step.
Program load_program(const std::string& text, VarTable& vt);

}  // namespace qet
