#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace qet {

using cplx = std::complex<double>;
using Matrix = std::vector<std::vector<cplx>>;  // row-major, rectangular

// ---------------------------------------------------------------------------
// Expressions. `resolved` slots are filled in by validate(); they cache the
// store index of a variable so the evaluators never do string lookups.
// ---------------------------------------------------------------------------

struct AExp;
struct BExp;
using AExpPtr = std::shared_ptr<const AExp>;
using BExpPtr = std::shared_ptr<const BExp>;

enum class AOp { Num, Var, Add, Sub, Mul };

struct AExp {
  AOp op;
  std::int64_t num = 0;
  std::string var;
  AExpPtr lhs, rhs;
  mutable int line = 0, col = 0;  // mutable: the parser stamps positions late
  mutable int resolved = -1;      // int-store index for Var
};

enum class BOp { Lit, Var, Not, And, Or, Eq, Le, Lt };

struct BExp {
  BOp op;
  bool lit = false;
  std::string var;
  BExpPtr blhs, brhs;  // Not uses blhs only
  AExpPtr alhs, arhs;  // Eq/Le/Lt
  mutable int line = 0, col = 0;  // mutable: the parser stamps positions late
  mutable int resolved = -1;      // bool-store index for Var
};

AExpPtr make_num(std::int64_t n);
AExpPtr make_int_var(const std::string& name);
AExpPtr make_aexp(AOp op, AExpPtr l, AExpPtr r);
BExpPtr make_blit(bool b);
BExpPtr make_bool_var(const std::string& name);
BExpPtr make_not(BExpPtr b);
BExpPtr make_bbin(BOp op, BExpPtr l, BExpPtr r);
BExpPtr make_cmp(BOp op, AExpPtr l, AExpPtr r);

// ---------------------------------------------------------------------------
// Unitaries. Builtins are instantiated against the target dimensions when the
// statement is applied; Matrix carries an explicit literal.
// ---------------------------------------------------------------------------

enum class GateKind { H, X, T, CNOT, CZ, SHIFT, Matrix };

struct Unitary {
  GateKind kind = GateKind::H;
  Matrix mat;  // only for Matrix
  int line = 0, col = 0;
};

const char* gate_name(GateKind k);

// ---------------------------------------------------------------------------
// Statements.
// ---------------------------------------------------------------------------

enum class SOp {
  Skip,
  AssignInt,    // var = aexp
  AssignBool,   // var = bexp
  Apply,        // regs *= U
  Measure,      // var = meas(reg)        (reg must be 2-dimensional)
  MeasureZero,  // var = measzero(reg)    (outcome: position 0 vs rest)
  Consume,      // consume(aexp)
  Seq,
  If,
  While,
  Summarized,  // @summary(label) { stmt }
  Call,        // call proc(args)          -- removed by expand_macros
  PrepZero,    // reg = |0>                -- removed by expand_macros
  PrepPlus,    // reg = |+>                -- removed by expand_macros
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  SOp op;
  std::string var;                 // assign target / measure target / label / proc name
  std::string reg;                 // measure source / prep target
  std::vector<std::string> regs;   // Apply targets, Call args
  AExpPtr aexp;                    // AssignInt, Consume
  BExpPtr bexp;                    // AssignBool, If/While condition
  Unitary unitary;                 // Apply
  StmtPtr s1, s2;                  // Seq lhs/rhs, If then/else; s1 = While/Summarized body
  int line = 0, col = 0;
  mutable int resolved_var = -1;   // store index of `var`
  mutable int resolved_reg = -1;   // register index of `reg`
  mutable std::vector<int> resolved_regs;
};

StmtPtr make_stmt(SOp op);
StmtPtr make_seq(StmtPtr a, StmtPtr b);

struct Decl {
  enum class Kind { Bool, Int, QReg } kind;
  std::string id;
  int dim = 0;  // QReg only
  int line = 0, col = 0;
};

struct Proc {
  std::string name;
  std::vector<std::string> params;
  StmtPtr body;
  int line = 0, col = 0;
};

struct Program {
  std::vector<Decl> decls;
  std::vector<Proc> procs;
  StmtPtr body;
};

// Pretty-printer. parse(print(parse(text))) reproduces print(parse(text)).
std::string print_aexp(const AExp& e);
std::string print_bexp(const BExp& e);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_program(const Program& p);
std::string print_matrix(const Matrix& m);

}  // namespace qet
