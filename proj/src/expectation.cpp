#include "qet/expectation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "qet/cost.hpp"
#include "qet/errors.hpp"
#include "qet/sexpr.hpp"

namespace qet {

ExpPtr exp_const(double c) {
  auto e = std::make_shared<ExpectationExpr>();
  e->op = EOp::Const;
  e->cval = c;
  return e;
}

ExpPtr exp_ind(BExpPtr b) {
  auto e = std::make_shared<ExpectationExpr>();
  e->op = EOp::Ind;
  e->cond = std::move(b);
  return e;
}

ExpPtr exp_arith(AExpPtr a) {
  auto e = std::make_shared<ExpectationExpr>();
  e->op = EOp::Arith;
  e->arith = std::move(a);
  return e;
}

ExpPtr exp_nary(EOp op, std::vector<ExpPtr> args) {
  auto e = std::make_shared<ExpectationExpr>();
  e->op = op;
  e->args = std::move(args);
  return e;
}

ExpPtr exp_scale(double c, ExpPtr arg) {
  auto e = std::make_shared<ExpectationExpr>();
  e->op = EOp::Scale;
  e->cval = c;
  e->args = {std::move(arg)};
  return e;
}

ExpPtr exp_quadform(std::vector<std::string> regs, Matrix q) {
  auto e = std::make_shared<ExpectationExpr>();
  e->op = EOp::QuadForm;
  e->regs = std::move(regs);
  e->q = std::move(q);
  return e;
}

// --- parsing -----------------------------------------------------------------

namespace {

[[noreturn]] void serr(const SNode& n, const std::string& msg) {
  fail(ErrorKind::Syntax, msg, n.line, n.col);
}

AExpPtr aexp_of(const SNode& n);

BExpPtr bexp_of(const SNode& n) {
  if (n.kind == SNode::Kind::Sym) {
    if (n.sym == "true") return make_blit(true);
    if (n.sym == "false") return make_blit(false);
    auto v = make_bool_var(n.sym);
    const_cast<BExp*>(v.get())->line = n.line;
    const_cast<BExp*>(v.get())->col = n.col;
    return v;
  }
  if (n.kind != SNode::Kind::List || n.items.empty() || n.items[0].kind != SNode::Kind::Sym)
    serr(n, "expected a boolean condition");
  const std::string& op = n.items[0].sym;
  auto arity = [&](std::size_t k) {
    if (n.items.size() != k + 1) serr(n, "'" + op + "' expects " + std::to_string(k) + " arguments");
  };
  if (op == "true") return make_blit(true);
  if (op == "false") return make_blit(false);
  if (op == "not") {
    arity(1);
    return make_not(bexp_of(n.items[1]));
  }
  if (op == "and" || op == "or") {
    if (n.items.size() < 3) serr(n, "'" + op + "' expects at least 2 arguments");
    BExpPtr acc = bexp_of(n.items[1]);
    for (std::size_t i = 2; i < n.items.size(); ++i)
      acc = make_bbin(op == "and" ? BOp::And : BOp::Or, acc, bexp_of(n.items[i]));
    return acc;
  }
  if (op == "=" || op == "<=" || op == "<") {
    arity(2);
    BOp bop = op == "=" ? BOp::Eq : (op == "<=" ? BOp::Le : BOp::Lt);
    return make_cmp(bop, aexp_of(n.items[1]), aexp_of(n.items[2]));
  }
  serr(n, "unknown boolean operator '" + op + "'");
}

AExpPtr aexp_of(const SNode& n) {
  if (n.kind == SNode::Kind::Num) {
    if (!n.integral) serr(n, "expected an integer");
    return make_num(n.inum);
  }
  if (n.kind == SNode::Kind::Sym) {
    auto v = make_int_var(n.sym);
    const_cast<AExp*>(v.get())->line = n.line;
    const_cast<AExp*>(v.get())->col = n.col;
    return v;
  }
  if (n.kind != SNode::Kind::List || n.items.size() != 3 || n.items[0].kind != SNode::Kind::Sym)
    serr(n, "expected an integer expression");
  const std::string& op = n.items[0].sym;
  AOp aop;
  if (op == "+") aop = AOp::Add;
  else if (op == "-") aop = AOp::Sub;
  else if (op == "*") aop = AOp::Mul;
  else serr(n, "unknown integer operator '" + op + "'");
  return make_aexp(aop, aexp_of(n.items[1]), aexp_of(n.items[2]));
}

ExpPtr exp_of(const SNode& n) {
  if (n.kind == SNode::Kind::Num) return exp_const(n.num);
  if (n.kind != SNode::Kind::List || n.items.empty() || n.items[0].kind != SNode::Kind::Sym)
    serr(n, "expected an expectation expression");
  const std::string& op = n.items[0].sym;
  if (op == "const") {
    if (n.items.size() != 2 || n.items[1].kind != SNode::Kind::Num)
      serr(n, "(const c) expects one number");
    if (n.items[1].num < 0) serr(n, "expectations are nonnegative");
    return exp_const(n.items[1].num);
  }
  if (op == "ind") {
    if (n.items.size() != 2) serr(n, "(ind b) expects one condition");
    return exp_ind(bexp_of(n.items[1]));
  }
  if (op == "arith") {
    if (n.items.size() != 2) serr(n, "(arith a) expects one integer expression");
    return exp_arith(aexp_of(n.items[1]));
  }
  if (op == "add" || op == "mul" || op == "min" || op == "max") {
    if (n.items.size() < 3) serr(n, "'" + op + "' expects at least 2 arguments");
    std::vector<ExpPtr> args;
    for (std::size_t i = 1; i < n.items.size(); ++i) args.push_back(exp_of(n.items[i]));
    EOp eop = op == "add" ? EOp::Add : op == "mul" ? EOp::Mul : op == "min" ? EOp::Min : EOp::Max;
    return exp_nary(eop, std::move(args));
  }
  if (op == "scale") {
    if (n.items.size() != 3 || n.items[1].kind != SNode::Kind::Num)
      serr(n, "(scale c e) expects a number and an expression");
    if (n.items[1].num < 0) serr(n, "scale factor must be nonnegative");
    return exp_scale(n.items[1].num, exp_of(n.items[2]));
  }
  if (op == "quadform") {
    if (n.items.size() != 3 || n.items[1].kind != SNode::Kind::List ||
        n.items[2].kind != SNode::Kind::Mat)
      serr(n, "(quadform (regs...) [[...]]) expects a register list and a matrix");
    std::vector<std::string> regs;
    for (const auto& r : n.items[1].items) {
      if (r.kind != SNode::Kind::Sym) serr(r, "expected a register name");
      regs.push_back(r.sym);
    }
    if (regs.empty()) serr(n, "quadform needs at least one register");
    auto e = exp_quadform(std::move(regs), n.items[2].mat);
    const_cast<ExpectationExpr*>(e.get())->line = n.line;
    const_cast<ExpectationExpr*>(e.get())->col = n.col;
    return e;
  }
  serr(n, "unknown expectation operator '" + op + "'");
}

}  // namespace

ExpPtr parse_expectation(const std::string& text) {
  auto nodes = parse_sexprs(text);
  if (nodes.size() != 1) fail(ErrorKind::Syntax, "expected exactly one expectation expression");
  return exp_of(nodes[0]);
}

ExpPtr parse_expectation_node(const SNode& n) { return exp_of(n); }

std::string print_expectation(const ExpectationExpr& e) {
  switch (e.op) {
    case EOp::Const: {
      char buf[40];
      snprintf(buf, sizeof buf, "%.17g", e.cval);
      return std::string("(const ") + buf + ")";
    }
    case EOp::Ind:
      return "(ind " + print_bexp(*e.cond) + ")";
    case EOp::Arith:
      return "(arith " + print_aexp(*e.arith) + ")";
    case EOp::Add:
    case EOp::Mul:
    case EOp::Min:
    case EOp::Max: {
      std::string head = e.op == EOp::Add ? "add" : e.op == EOp::Mul ? "mul"
                                                : e.op == EOp::Min   ? "min"
                                                                     : "max";
      std::string out = "(" + head;
      for (const auto& a : e.args) out += " " + print_expectation(*a);
      return out + ")";
    }
    case EOp::Scale: {
      char buf[40];
      snprintf(buf, sizeof buf, "%.17g", e.cval);
      return std::string("(scale ") + buf + " " + print_expectation(*e.args[0]) + ")";
    }
    case EOp::QuadForm: {
      std::string out = "(quadform (";
      for (std::size_t i = 0; i < e.regs.size(); ++i) {
        if (i) out += " ";
        out += e.regs[i];
      }
      return out + ") " + print_matrix(e.q) + ")";
    }
  }
  return "?";
}

// --- resolution / evaluation -------------------------------------------------

namespace {

void resolve_bexp_names(const BExp& e, const VarTable& vt) {
  switch (e.op) {
    case BOp::Var: {
      int i = vt.find_bool(e.var);
      if (i < 0) fail(ErrorKind::Type, "'" + e.var + "' is not a bool variable", e.line, e.col);
      e.resolved = i;
      break;
    }
    case BOp::Not:
      resolve_bexp_names(*e.blhs, vt);
      break;
    case BOp::And:
    case BOp::Or:
      resolve_bexp_names(*e.blhs, vt);
      resolve_bexp_names(*e.brhs, vt);
      break;
    case BOp::Eq:
    case BOp::Le:
    case BOp::Lt: {
      std::function<void(const AExp&)> res = [&](const AExp& a) {
        if (a.op == AOp::Var) {
          int i = vt.find_int(a.var);
          if (i < 0) fail(ErrorKind::Type, "'" + a.var + "' is not an int variable", a.line, a.col);
          a.resolved = i;
        }
        if (a.lhs) res(*a.lhs);
        if (a.rhs) res(*a.rhs);
      };
      res(*e.alhs);
      res(*e.arhs);
      break;
    }
    default:
      break;
  }
}

void resolve_aexp_names(const AExp& a, const VarTable& vt) {
  if (a.op == AOp::Var) {
    int i = vt.find_int(a.var);
    if (i < 0) fail(ErrorKind::Type, "'" + a.var + "' is not an int variable", a.line, a.col);
    a.resolved = i;
  }
  if (a.lhs) resolve_aexp_names(*a.lhs, vt);
  if (a.rhs) resolve_aexp_names(*a.rhs, vt);
}

bool matrix_hermitian_psd(const Matrix& q, double tol) {
  std::size_t n = q.size();
  for (const auto& row : q)
    if (row.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(q[i][j] - std::conj(q[j][i])) > tol) return false;
  // PSD check via eigenvalues is done in the density module for density
  // matrices; for observables we only require Hermitian and nonnegative
  // diagonal as a cheap sanity guard, the full value is clamped at 0 anyway.
  return true;
}

}  // namespace

void resolve_expectation(const ExpectationExpr& e, const VarTable& vt) {
  switch (e.op) {
    case EOp::Const:
      break;
    case EOp::Ind:
      resolve_bexp_names(*e.cond, vt);
      break;
    case EOp::Arith:
      resolve_aexp_names(*e.arith, vt);
      break;
    case EOp::Add:
    case EOp::Mul:
    case EOp::Min:
    case EOp::Max:
    case EOp::Scale:
      for (const auto& a : e.args) resolve_expectation(*a, vt);
      break;
    case EOp::QuadForm: {
      e.resolved_regs.clear();
      e.resolved_dims.clear();
      e.resolved_strides.clear();
      std::int64_t want = 1;
      for (const auto& r : e.regs) {
        int i = vt.find_reg(r);
        if (i < 0) fail(ErrorKind::Type, "'" + r + "' is not a quantum register", e.line, e.col);
        e.resolved_regs.push_back(i);
        e.resolved_dims.push_back(vt.dims[i]);
        e.resolved_strides.push_back(vt.strides[i]);
        want *= vt.dims[i];
      }
      if (static_cast<std::int64_t>(e.q.size()) != want)
        fail(ErrorKind::Dimension,
             "quadform matrix is " + std::to_string(e.q.size()) + "-dimensional but registers span " +
                 std::to_string(want),
             e.line, e.col);
      if (!matrix_hermitian_psd(e.q, 1e-9))
        fail(ErrorKind::Dimension, "quadform matrix must be Hermitian", e.line, e.col);
      break;
    }
  }
}

double eval_expectation(const ExpectationExpr& e, const MachineState& s) {
  switch (e.op) {
    case EOp::Const:
      return e.cval;
    case EOp::Ind:
      return eval_bexp(*e.cond, s.store) ? 1.0 : 0.0;
    case EOp::Arith: {
      double v = static_cast<double>(eval_aexp(*e.arith, s.store));
      return v < 0.0 ? 0.0 : v;
    }
    case EOp::Add: {
      double acc = 0.0;
      for (const auto& a : e.args) acc += eval_expectation(*a, s);
      return acc;
    }
    case EOp::Mul: {
      double acc = 1.0;
      for (const auto& a : e.args) {
        double v = eval_expectation(*a, s);
        acc = (acc == 0.0 || v == 0.0) ? 0.0 : acc * v;  // 0 * inf = 0
        if (acc == 0.0) return 0.0;
      }
      return acc;
    }
    case EOp::Scale: {
      double v = eval_expectation(*e.args[0], s);
      return ext_scale(e.cval, v);
    }
    case EOp::Min: {
      double acc = kInf;
      for (const auto& a : e.args) acc = std::min(acc, eval_expectation(*a, s));
      return acc;
    }
    case EOp::Max: {
      double acc = 0.0;
      for (const auto& a : e.args) acc = std::max(acc, eval_expectation(*a, s));
      return acc;
    }
    case EOp::QuadForm:
      if (e.resolved_dims.empty())
        fail(ErrorKind::Internal, "quadform evaluated before resolution", e.line, e.col);
      return quad_form_value_spans(s.amps, e.resolved_dims, e.resolved_strides, e.q);
  }
  fail(ErrorKind::Internal, "unhandled expectation operator");
}

bool classical_check(const ExpectationExpr& e) {
  if (e.op == EOp::QuadForm) return false;
  for (const auto& a : e.args)
    if (!classical_check(*a)) return false;
  return true;
}

void expectation_vars(const ExpectationExpr& e, std::vector<std::string>& bools,
                      std::vector<std::string>& ints) {
  std::function<void(const BExp&)> vb = [&](const BExp& b) {
    if (b.op == BOp::Var) bools.push_back(b.var);
    if (b.blhs) vb(*b.blhs);
    if (b.brhs) vb(*b.brhs);
    std::function<void(const AExp&)> va = [&](const AExp& a) {
      if (a.op == AOp::Var) ints.push_back(a.var);
      if (a.lhs) va(*a.lhs);
      if (a.rhs) va(*a.rhs);
    };
    if (b.alhs) va(*b.alhs);
    if (b.arhs) va(*b.arhs);
  };
  std::function<void(const AExp&)> va = [&](const AExp& a) {
    if (a.op == AOp::Var) ints.push_back(a.var);
    if (a.lhs) va(*a.lhs);
    if (a.rhs) va(*a.rhs);
  };
  switch (e.op) {
    case EOp::Ind:
      vb(*e.cond);
      break;
    case EOp::Arith:
      va(*e.arith);
      break;
    default:
      for (const auto& a : e.args) expectation_vars(*a, bools, ints);
  }
}

std::vector<int> expectation_regs(const ExpectationExpr& e, const VarTable& vt) {
  std::set<int> acc;
  std::function<void(const ExpectationExpr&)> go = [&](const ExpectationExpr& x) {
    if (x.op == EOp::QuadForm) {
      if (x.resolved_regs.empty()) resolve_expectation(x, vt);
      for (int r : x.resolved_regs) acc.insert(r);
    }
    for (const auto& a : x.args) go(*a);
  };
  go(e);
  return std::vector<int>(acc.begin(), acc.end());
}

// --- deterministic RNG and suites ---------------------------------------------

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (int i = 0; i < 4; ++i) s[i] = splitmix(x);
}

std::uint64_t Rng::next_u64() {
  std::uint64_t result = rotl(s[1] * 5, 7) * 9;
  std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::next_normal() {
  // Box-Muller; avoids log(0) by flooring the uniform draw.
  double u1 = std::max(next_unit(), 1e-300);
  double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Rng::next_int(std::int64_t lo, std::int64_t hi) {
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(next_u64() % span);
}

AmpsPtr haar_random_amps(std::int64_t dim, Rng& rng) {
  std::vector<cplx> v(static_cast<std::size_t>(dim));
  double norm2 = 0.0;
  for (auto& c : v) {
    c = cplx(rng.next_normal(), rng.next_normal());
    norm2 += std::norm(c);
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : v) c *= inv;
  return make_amps(std::move(v));
}

std::vector<MachineState> make_suite(const VarTable& vt, int random_count, std::uint64_t seed) {
  std::vector<MachineState> out;
  MachineState base = initial_state(vt);
  out.push_back(base);
  if (vt.total_dim <= 8) {
    for (std::int64_t k = 1; k < vt.total_dim; ++k) {
      MachineState s = base;
      std::vector<cplx> v(static_cast<std::size_t>(vt.total_dim), cplx(0, 0));
      v[static_cast<std::size_t>(k)] = 1.0;
      s.amps = make_amps(std::move(v));
      out.push_back(std::move(s));
    }
  }
  for (std::size_t i = 0; i < vt.ints.size(); ++i) {
    for (std::int64_t val = -2; val <= 8; ++val) {
      if (val == 0) continue;  // base state already has 0
      MachineState s = base;
      s.store.ints[i] = val;
      out.push_back(std::move(s));
    }
  }
  Rng rng(seed);
  for (int i = 0; i < random_count; ++i) {
    MachineState s;
    s.store.bools.resize(vt.bools.size());
    s.store.ints.resize(vt.ints.size());
    for (auto& b : s.store.bools) b = rng.next_u64() & 1 ? 1 : 0;
    for (auto& x : s.store.ints) x = rng.next_int(-8, 8);
    s.amps = haar_random_amps(vt.total_dim, rng);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace qet
