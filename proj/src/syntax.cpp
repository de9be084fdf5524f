#include "qet/syntax.hpp"

#include <cmath>
#include <sstream>

namespace qet {

AExpPtr make_num(std::int64_t n) {
  auto e = std::make_shared<AExp>();
  e->op = AOp::Num;
  e->num = n;
  return e;
}

AExpPtr make_int_var(const std::string& name) {
  auto e = std::make_shared<AExp>();
  e->op = AOp::Var;
  e->var = name;
  return e;
}

AExpPtr make_aexp(AOp op, AExpPtr l, AExpPtr r) {
  auto e = std::make_shared<AExp>();
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

BExpPtr make_blit(bool b) {
  auto e = std::make_shared<BExp>();
  e->op = BOp::Lit;
  e->lit = b;
  return e;
}

BExpPtr make_bool_var(const std::string& name) {
  auto e = std::make_shared<BExp>();
  e->op = BOp::Var;
  e->var = name;
  return e;
}

BExpPtr make_not(BExpPtr b) {
  auto e = std::make_shared<BExp>();
  e->op = BOp::Not;
  e->blhs = std::move(b);
  return e;
}

BExpPtr make_bbin(BOp op, BExpPtr l, BExpPtr r) {
  auto e = std::make_shared<BExp>();
  e->op = op;
  e->blhs = std::move(l);
  e->brhs = std::move(r);
  return e;
}

BExpPtr make_cmp(BOp op, AExpPtr l, AExpPtr r) {
  auto e = std::make_shared<BExp>();
  e->op = op;
  e->alhs = std::move(l);
  e->arhs = std::move(r);
  return e;
}

StmtPtr make_stmt(SOp op) {
  auto s = std::make_shared<Stmt>();
  s->op = op;
  return s;
}

StmtPtr make_seq(StmtPtr a, StmtPtr b) {
  auto s = std::make_shared<Stmt>();
  s->op = SOp::Seq;
  s->s1 = std::move(a);
  s->s2 = std::move(b);
  return s;
}

const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::T: return "T";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::SHIFT: return "SHIFT";
    case GateKind::Matrix: return "matrix";
  }
  return "?";
}

namespace {

// Shortest decimal that round-trips; integers print without a trailing ".0"
// to keep program text tidy.
std::string num_str(double v) {
  if (v == static_cast<std::int64_t>(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<std::int64_t>(v));
  }
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

std::string cplx_str(const cplx& c) {
  if (c.imag() == 0.0) return num_str(c.real());
  std::string im = num_str(std::fabs(c.imag())) + "i";
  if (c.real() == 0.0) return (c.imag() < 0 ? "-" : "") + im;
  return num_str(c.real()) + (c.imag() < 0 ? "-" : "+") + im;
}

int aprec(AOp op) {
  switch (op) {
    case AOp::Add:
    case AOp::Sub: return 1;
    case AOp::Mul: return 2;
    default: return 3;
  }
}

std::string print_aexp_p(const AExp& e, int parent) {
  std::string s;
  switch (e.op) {
    case AOp::Num: s = std::to_string(e.num); break;
    case AOp::Var: s = e.var; break;
    case AOp::Add:
      s = print_aexp_p(*e.lhs, 1) + " + " + print_aexp_p(*e.rhs, 2);
      break;
    case AOp::Sub:
      s = print_aexp_p(*e.lhs, 1) + " - " + print_aexp_p(*e.rhs, 2);
      break;
    case AOp::Mul:
      s = print_aexp_p(*e.lhs, 2) + " * " + print_aexp_p(*e.rhs, 3);
      break;
  }
  if (aprec(e.op) < parent && (e.op == AOp::Add || e.op == AOp::Sub || e.op == AOp::Mul))
    return "(" + s + ")";
  return s;
}

int bprec(BOp op) {
  switch (op) {
    case BOp::Or: return 1;
    case BOp::And: return 2;
    case BOp::Not: return 3;
    default: return 4;
  }
}

std::string print_bexp_p(const BExp& e, int parent) {
  std::string s;
  switch (e.op) {
    case BOp::Lit: s = e.lit ? "true" : "false"; break;
    case BOp::Var: s = e.var; break;
    case BOp::Not: s = "!" + print_bexp_p(*e.blhs, 3); break;
    case BOp::And:
      s = print_bexp_p(*e.blhs, 2) + " && " + print_bexp_p(*e.brhs, 3);
      break;
    case BOp::Or:
      s = print_bexp_p(*e.blhs, 1) + " || " + print_bexp_p(*e.brhs, 2);
      break;
    case BOp::Eq: s = print_aexp_p(*e.alhs, 0) + " == " + print_aexp_p(*e.arhs, 0); break;
    case BOp::Le: s = print_aexp_p(*e.alhs, 0) + " <= " + print_aexp_p(*e.arhs, 0); break;
    case BOp::Lt: s = print_aexp_p(*e.alhs, 0) + " < " + print_aexp_p(*e.arhs, 0); break;
  }
  if (bprec(e.op) < parent && (e.op == BOp::And || e.op == BOp::Or)) return "(" + s + ")";
  return s;
}

std::string ind(int n) { return std::string(2 * n, ' '); }

void print_stmt_into(const Stmt& s, int depth, std::string& out);

void print_block(const Stmt& s, int depth, std::string& out) {
  out += "{\n";
  print_stmt_into(s, depth + 1, out);
  out += "\n" + ind(depth) + "}";
}

void print_stmt_into(const Stmt& s, int depth, std::string& out) {
  switch (s.op) {
    case SOp::Skip:
      out += ind(depth) + "skip";
      break;
    case SOp::AssignInt:
      out += ind(depth) + s.var + " = " + print_aexp_p(*s.aexp, 0);
      break;
    case SOp::AssignBool:
      out += ind(depth) + s.var + " = " + print_bexp_p(*s.bexp, 0);
      break;
    case SOp::Apply: {
      out += ind(depth);
      for (std::size_t i = 0; i < s.regs.size(); ++i) {
        if (i) out += ", ";
        out += s.regs[i];
      }
      out += " *= ";
      if (s.unitary.kind == GateKind::Matrix)
        out += print_matrix(s.unitary.mat);
      else
        out += gate_name(s.unitary.kind);
      break;
    }
    case SOp::Measure:
      out += ind(depth) + s.var + " = meas(" + s.reg + ")";
      break;
    case SOp::MeasureZero:
      out += ind(depth) + s.var + " = measzero(" + s.reg + ")";
      break;
    case SOp::Consume:
      out += ind(depth) + "consume(" + print_aexp_p(*s.aexp, 0) + ")";
      break;
    case SOp::Seq:
      print_stmt_into(*s.s1, depth, out);
      out += ";\n";
      print_stmt_into(*s.s2, depth, out);
      break;
    case SOp::If:
      out += ind(depth) + "if (" + print_bexp_p(*s.bexp, 0) + ") ";
      print_block(*s.s1, depth, out);
      out += " else ";
      print_block(*s.s2, depth, out);
      break;
    case SOp::While:
      out += ind(depth) + "while (" + print_bexp_p(*s.bexp, 0) + ") ";
      print_block(*s.s1, depth, out);
      break;
    case SOp::Summarized:
      out += ind(depth) + "@summary(" + s.var + ") ";
      print_block(*s.s1, depth, out);
      break;
    case SOp::Call: {
      out += ind(depth) + "call " + s.var + "(";
      for (std::size_t i = 0; i < s.regs.size(); ++i) {
        if (i) out += ", ";
        out += s.regs[i];
      }
      out += ")";
      break;
    }
    case SOp::PrepZero:
      out += ind(depth) + s.reg + " = |0>";
      break;
    case SOp::PrepPlus:
      out += ind(depth) + s.reg + " = |+>";
      break;
  }
}

}  // namespace

std::string print_matrix(const Matrix& m) {
  std::string out = "[";
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (r) out += ", ";
    out += "[";
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      if (c) out += ", ";
      out += cplx_str(m[r][c]);
    }
    out += "]";
  }
  out += "]";
  return out;
}

std::string print_aexp(const AExp& e) { return print_aexp_p(e, 0); }
std::string print_bexp(const BExp& e) { return print_bexp_p(e, 0); }

std::string print_stmt(const Stmt& s, int indent) {
  std::string out;
  print_stmt_into(s, indent, out);
  return out;
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& d : p.decls) {
    switch (d.kind) {
      case Decl::Kind::Bool: out += "bool " + d.id + ";\n"; break;
      case Decl::Kind::Int: out += "int " + d.id + ";\n"; break;
      case Decl::Kind::QReg:
        out += "qreg " + d.id + "[" + std::to_string(d.dim) + "];\n";
        break;
    }
  }
  for (const auto& pr : p.procs) {
    out += "proc " + pr.name + "(";
    for (std::size_t i = 0; i < pr.params.size(); ++i) {
      if (i) out += ", ";
      out += pr.params[i];
    }
    out += ") {\n" + print_stmt(*pr.body, 1) + "\n}\n";
  }
  if (p.body) out += print_stmt(*p.body, 0) + "\n";
  return out;
}

}  // namespace qet
