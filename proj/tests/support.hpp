#pragma once

// Shared test helpers: corpus fixture loading, a seeded random program
// generator, and syntactic independence of expectations from statements.

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qet/check.hpp"
#include "qet/expand.hpp"
#include "qet/expectation.hpp"
#include "qet/parser.hpp"
#include "qet/pars.hpp"
#include "qet/wp.hpp"

#ifndef QET_CORPUS_DIR
#define QET_CORPUS_DIR "corpus"
#endif

namespace qet::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string corpus_path(const std::string& name) {
  return std::string(QET_CORPUS_DIR) + "/" + name;
}

inline Program load_corpus(const std::string& name, VarTable& vt) {
  return load_program(read_file(corpus_path(name)), vt);
}

// Locates the statement frames of a program's K-th loop so tests can start
// runs at the loop head, the way the worked traces do.
inline const Stmt* nth_loop(const Program& p, int k) {
  LabelMap lm = collect_labels(p);
  if (k >= static_cast<int>(lm.loops.size()))
    throw std::runtime_error("program has no loop " + std::to_string(k));
  return lm.loops[k];
}

inline Config config_at(const Stmt* s, MachineState st) {
  Config c;
  c.state = std::move(st);
  push_frames(c.frames, s);
  return c;
}

// --- random programs ----------------------------------------------------------

// Generates small well-typed programs over a fixed layout: two bools, two
// ints, and up to three qubit registers. Loops appear only with guards over
// b0 so most random programs terminate quickly, but nothing below depends on
// termination.
struct ProgramGen {
  Rng rng;
  int max_depth = 4;
  int num_regs = 3;
  bool allow_while = true;
  // Inside a while body the statement alphabet is restricted so the set of
  // loop-entry states stays finite: int updates would grow the store without
  // bound, and repeated H mixed with T walks a dense orbit of amplitudes.
  // Either one makes fixpoint iteration intern new entry states forever.
  bool in_loop = false;

  explicit ProgramGen(std::uint64_t seed) : rng(seed) {}

  std::vector<std::string> bools{"b0", "b1"};
  std::vector<std::string> ints{"n0", "n1"};
  std::vector<std::string> regs{"r0", "r1", "r2"};

  AExpPtr gen_aexp(int depth) {
    switch (rng.next_int(0, depth <= 0 ? 1 : 3)) {
      case 0:
        return make_num(rng.next_int(-3, 3));
      case 1:
        return make_int_var(ints[rng.next_int(0, 1)]);
      case 2:
        return make_aexp(AOp::Add, gen_aexp(depth - 1), gen_aexp(depth - 1));
      default:
        // keep one side constant so iterated assignments cannot overflow
        return make_aexp(rng.next_int(0, 1) ? AOp::Sub : AOp::Mul,
                         make_num(rng.next_int(-2, 2)), gen_aexp(depth - 1));
    }
  }

  BExpPtr gen_bexp(int depth) {
    switch (rng.next_int(0, depth <= 0 ? 1 : 4)) {
      case 0:
        return make_blit(rng.next_int(0, 1) != 0);
      case 1:
        return make_bool_var(bools[rng.next_int(0, 1)]);
      case 2:
        return make_not(gen_bexp(depth - 1));
      case 3:
        return make_bbin(rng.next_int(0, 1) ? BOp::And : BOp::Or, gen_bexp(depth - 1),
                         gen_bexp(depth - 1));
      default: {
        BOp op = rng.next_int(0, 1) ? BOp::Le : BOp::Lt;
        if (rng.next_int(0, 3) == 0) op = BOp::Eq;
        return make_cmp(op, gen_aexp(depth - 1), gen_aexp(depth - 1));
      }
    }
  }

  StmtPtr gate_stmt() {
    auto s = std::make_shared<Stmt>();
    s->op = SOp::Apply;
    int r = static_cast<int>(rng.next_int(0, num_regs - 1));
    if (num_regs >= 2 && rng.next_int(0, 3) == 0) {
      int r2 = static_cast<int>(rng.next_int(0, num_regs - 2));
      if (r2 >= r) ++r2;
      s->regs = {regs[r], regs[r2]};
      s->unitary.kind = rng.next_int(0, 1) ? GateKind::CNOT : GateKind::CZ;
    } else {
      s->regs = {regs[r]};
      int g = static_cast<int>(rng.next_int(0, 2));
      s->unitary.kind = g == 0 ? (in_loop ? GateKind::X : GateKind::H)
                               : (g == 1 ? GateKind::X : GateKind::T);
    }
    return s;
  }

  StmtPtr gen_stmt(int depth) {
    int pick = static_cast<int>(rng.next_int(0, depth <= 0 ? 6 : (allow_while ? 9 : 8)));
    switch (pick) {
      case 0:
        return make_stmt(SOp::Skip);
      case 1: {
        auto s = std::make_shared<Stmt>();
        s->op = SOp::AssignBool;
        s->var = bools[rng.next_int(0, 1)];
        s->bexp = gen_bexp(2);
        return s;
      }
      case 2: {
        auto s = std::make_shared<Stmt>();
        if (in_loop) {
          s->op = SOp::AssignBool;
          s->var = bools[rng.next_int(0, 1)];
          s->bexp = gen_bexp(2);
        } else {
          s->op = SOp::AssignInt;
          s->var = ints[rng.next_int(0, 1)];
          s->aexp = gen_aexp(2);
        }
        return s;
      }
      case 3:
        return gate_stmt();
      case 4: {
        auto s = std::make_shared<Stmt>();
        s->op = rng.next_int(0, 3) == 0 ? SOp::MeasureZero : SOp::Measure;
        s->var = bools[rng.next_int(0, 1)];
        s->reg = regs[rng.next_int(0, num_regs - 1)];
        return s;
      }
      case 5: {
        auto s = std::make_shared<Stmt>();
        s->op = SOp::Consume;
        s->aexp = gen_aexp(1);
        return s;
      }
      case 6: {
        auto s = std::make_shared<Stmt>();
        s->op = SOp::Consume;
        s->aexp = make_num(rng.next_int(0, 3));
        return s;
      }
      case 7:
        return make_seq(gen_stmt(depth - 1), gen_stmt(depth - 1));
      case 8: {
        auto s = std::make_shared<Stmt>();
        s->op = SOp::If;
        s->bexp = gen_bexp(2);
        s->s1 = gen_stmt(depth - 1);
        s->s2 = gen_stmt(depth - 1);
        return s;
      }
      default: {
        // while (b0 && ...) { body; b0 = meas(r); r *= H; b0 = meas(r) }
        // collapse, rotate, measure: the refreshed guard fails with
        // probability exactly 1/2 from any state, so every generated loop
        // terminates almost surely and fixpoints converge
        std::string r = regs[rng.next_int(0, num_regs - 1)];
        auto collapse = std::make_shared<Stmt>();
        collapse->op = SOp::Measure;
        collapse->var = "b0";
        collapse->reg = r;
        auto h = std::make_shared<Stmt>();
        h->op = SOp::Apply;
        h->regs = {r};
        h->unitary.kind = GateKind::H;
        auto m = std::make_shared<Stmt>();
        m->op = SOp::Measure;
        m->var = "b0";
        m->reg = r;
        bool saved = in_loop;
        in_loop = true;
        auto inner = gen_stmt(depth - 1);
        in_loop = saved;
        auto body = make_seq(inner, make_seq(StmtPtr(collapse), make_seq(h, m)));
        auto s = std::make_shared<Stmt>();
        s->op = SOp::While;
        s->bexp = make_bbin(BOp::And, make_bool_var("b0"), gen_bexp(1));
        s->s1 = body;
        return s;
      }
    }
  }

  Program gen_program(int depth) {
    Program p;
    for (const auto& b : bools) p.decls.push_back(Decl{Decl::Kind::Bool, b, 0});
    for (const auto& i : ints) p.decls.push_back(Decl{Decl::Kind::Int, i, 0});
    for (int r = 0; r < num_regs; ++r) p.decls.push_back(Decl{Decl::Kind::QReg, regs[r], 2});
    p.body = gen_stmt(depth);
    return p;
  }

  // nonnegative bounded expectations with classical and quantum parts
  ExpPtr gen_expectation(const VarTable& vt) {
    std::vector<ExpPtr> parts;
    parts.push_back(exp_const(rng.next_unit() * 2.0));
    if (rng.next_int(0, 1)) parts.push_back(exp_ind(gen_bexp(2)));
    if (rng.next_int(0, 1)) parts.push_back(exp_arith(gen_aexp(1)));
    if (rng.next_int(0, 1)) {
      int r = static_cast<int>(rng.next_int(0, num_regs - 1));
      std::int64_t d = vt.dims[vt.find_reg(regs[r])];
      Matrix q(d, std::vector<cplx>(d, 0.0));
      for (std::int64_t i = 0; i < d; ++i) q[i][i] = rng.next_unit() * 2.0;
      parts.push_back(exp_quadform({regs[r]}, q));
    }
    ExpPtr e = parts.size() == 1 ? parts[0] : exp_nary(EOp::Add, parts);
    resolve_expectation(*e, vt);
    return e;
  }

  MachineState gen_state(const VarTable& vt) {
    MachineState st = initial_state(vt);
    for (auto& b : st.store.bools) b = rng.next_int(0, 1) ? 1 : 0;
    for (auto& i : st.store.ints) i = rng.next_int(-4, 4);
    st.amps = haar_random_amps(vt.total_dim, rng);
    return st;
  }
};

// --- syntactic independence ---------------------------------------------------

inline void stmt_writes(const Stmt& s, std::set<std::string>& vars, std::set<std::string>& regs) {
  switch (s.op) {
    case SOp::AssignBool:
    case SOp::AssignInt:
      vars.insert(s.var);
      break;
    case SOp::Measure:
    case SOp::MeasureZero:
      vars.insert(s.var);
      regs.insert(s.reg);
      break;
    case SOp::Apply:
      for (const auto& r : s.regs) regs.insert(r);
      break;
    default:
      break;
  }
  if (s.s1) stmt_writes(*s.s1, vars, regs);
  if (s.s2) stmt_writes(*s.s2, vars, regs);
}

// True when the statement assigns no classical variable the expectation reads
// and touches no register it observes. The expectation's mean then passes
// through the statement unchanged: the operators it observes commute with
// every gate and measurement the statement performs.
inline bool independent(const Stmt& stm, const ExpectationExpr& e, const VarTable& vt) {
  std::set<std::string> wvars, wregs;
  stmt_writes(stm, wvars, wregs);
  std::vector<std::string> ebools, eints;
  expectation_vars(e, ebools, eints);
  for (const auto& v : ebools)
    if (wvars.count(v)) return false;
  for (const auto& v : eints)
    if (wvars.count(v)) return false;
  for (int r : expectation_regs(e, vt))
    if (wregs.count(vt.regs[r])) return false;
  return true;
}

inline bool stmt_measures(const Stmt& s) {
  if (s.op == SOp::Measure || s.op == SOp::MeasureZero) return true;
  if (s.s1 && stmt_measures(*s.s1)) return true;
  return s.s2 && stmt_measures(*s.s2);
}

// Stronger than independent: the expectation's value is constant along every
// execution branch, not just on average. A measurement anywhere in the
// statement breaks this for register-observing expectations, because measuring
// one register reshapes the conditional state of any register entangled with
// it even though the observed register is never touched directly.
inline bool branch_constant(const Stmt& stm, const ExpectationExpr& e, const VarTable& vt) {
  if (!independent(stm, e, vt)) return false;
  return expectation_regs(e, vt).empty() || !stmt_measures(stm);
}

}  // namespace qet::testing
