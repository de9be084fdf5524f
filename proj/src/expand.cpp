#include "qet/expand.hpp"

#include <functional>
#include <set>
#include <unordered_set>

#include "qet/errors.hpp"
#include "qet/parser.hpp"
#include "qet/state.hpp"

namespace qet {

namespace {

// --- renaming ---------------------------------------------------------------

using Renaming = std::unordered_map<std::string, std::string>;

std::string rename_of(const Renaming& r, const std::string& n) {
  auto it = r.find(n);
  return it == r.end() ? n : it->second;
}

AExpPtr rename_aexp(const AExpPtr& e, const Renaming& r) {
  if (!e) return e;
  auto c = std::make_shared<AExp>(*e);
  c->resolved = -1;
  if (c->op == AOp::Var) c->var = rename_of(r, c->var);
  c->lhs = rename_aexp(e->lhs, r);
  c->rhs = rename_aexp(e->rhs, r);
  return c;
}

BExpPtr rename_bexp(const BExpPtr& e, const Renaming& r) {
  if (!e) return e;
  auto c = std::make_shared<BExp>(*e);
  c->resolved = -1;
  if (c->op == BOp::Var) c->var = rename_of(r, c->var);
  c->blhs = rename_bexp(e->blhs, r);
  c->brhs = rename_bexp(e->brhs, r);
  c->alhs = rename_aexp(e->alhs, r);
  c->arhs = rename_aexp(e->arhs, r);
  return c;
}

StmtPtr rename_stmt(const StmtPtr& s, const Renaming& r) {
  if (!s) return s;
  auto c = std::make_shared<Stmt>(*s);
  c->resolved_var = -1;
  c->resolved_reg = -1;
  c->resolved_regs.clear();
  if (!c->var.empty() && c->op != SOp::Summarized && c->op != SOp::Call)
    c->var = rename_of(r, c->var);
  if (c->op == SOp::Call) {
    for (auto& a : c->regs) a = rename_of(r, a);
  } else {
    for (auto& a : c->regs) a = rename_of(r, a);
  }
  if (!c->reg.empty()) c->reg = rename_of(r, c->reg);
  c->aexp = rename_aexp(s->aexp, r);
  c->bexp = rename_bexp(s->bexp, r);
  c->s1 = rename_stmt(s->s1, r);
  c->s2 = rename_stmt(s->s2, r);
  return c;
}

// --- implicit-local usage inference ----------------------------------------

enum class UseKind { Bool, Int, QReg };

void note_use(std::unordered_map<std::string, UseKind>& uses, const std::string& n,
              UseKind k, int line, int col) {
  auto [it, fresh] = uses.emplace(n, k);
  if (!fresh && it->second != k)
    fail(ErrorKind::Type, "conflicting uses of implicit local '" + n + "' in procedure body",
         line, col);
}

void collect_aexp_uses(const AExpPtr& e, const std::set<std::string>& known,
                       std::unordered_map<std::string, UseKind>& uses) {
  if (!e) return;
  if (e->op == AOp::Var && !known.count(e->var))
    note_use(uses, e->var, UseKind::Int, e->line, e->col);
  collect_aexp_uses(e->lhs, known, uses);
  collect_aexp_uses(e->rhs, known, uses);
}

void collect_bexp_uses(const BExpPtr& e, const std::set<std::string>& known,
                       std::unordered_map<std::string, UseKind>& uses) {
  if (!e) return;
  if (e->op == BOp::Var && !known.count(e->var))
    note_use(uses, e->var, UseKind::Bool, e->line, e->col);
  collect_bexp_uses(e->blhs, known, uses);
  collect_bexp_uses(e->brhs, known, uses);
  collect_aexp_uses(e->alhs, known, uses);
  collect_aexp_uses(e->arhs, known, uses);
}

void collect_stmt_uses(const StmtPtr& s, const std::set<std::string>& known,
                       std::unordered_map<std::string, UseKind>& uses) {
  if (!s) return;
  auto reg_use = [&](const std::string& n) {
    if (!known.count(n)) note_use(uses, n, UseKind::QReg, s->line, s->col);
  };
  switch (s->op) {
    case SOp::AssignBool:
      if (!known.count(s->var)) note_use(uses, s->var, UseKind::Bool, s->line, s->col);
      break;
    case SOp::AssignInt:
      if (!known.count(s->var)) note_use(uses, s->var, UseKind::Int, s->line, s->col);
      break;
    case SOp::Measure:
    case SOp::MeasureZero:
      if (!known.count(s->var)) note_use(uses, s->var, UseKind::Bool, s->line, s->col);
      reg_use(s->reg);
      break;
    case SOp::Apply:
      for (const auto& r : s->regs) reg_use(r);
      break;
    case SOp::PrepZero:
    case SOp::PrepPlus:
      reg_use(s->reg);
      break;
    case SOp::Call:
      // arguments of a nested call must already be known names (params,
      // declared globals, or implicit locals classified elsewhere); leave
      // them to the recursive expansion to check
      break;
    case SOp::Summarized:
      fail(ErrorKind::Type,
           "@summary labels inside procedure bodies would duplicate per call site", s->line,
           s->col);
    default:
      break;
  }
  collect_aexp_uses(s->aexp, known, uses);
  collect_bexp_uses(s->bexp, known, uses);
  collect_stmt_uses(s->s1, known, uses);
  collect_stmt_uses(s->s2, known, uses);
}

struct Expander {
  const Program& src;
  std::unordered_map<std::string, const Proc*> procs;
  std::set<std::string> declared;
  std::vector<Decl> extra_decls;
  int site_counter = 0;
  std::vector<std::string> call_stack;

  explicit Expander(const Program& p) : src(p) {
    for (const auto& pr : p.procs) {
      if (!procs.emplace(pr.name, &pr).second)
        fail(ErrorKind::Type, "duplicate procedure '" + pr.name + "'", pr.line, pr.col);
    }
    for (const auto& d : p.decls) declared.insert(d.id);
  }

  StmtPtr expand_stmt(const StmtPtr& s) {
    if (!s) return s;
    switch (s->op) {
      case SOp::Call:
        return expand_call(s);
      case SOp::PrepZero:
      case SOp::PrepPlus:
        return expand_prep(s);
      default: {
        auto c = std::make_shared<Stmt>(*s);
        c->s1 = expand_stmt(s->s1);
        c->s2 = expand_stmt(s->s2);
        return c;
      }
    }
  }

  StmtPtr expand_prep(const StmtPtr& s) {
    // q = |0>  desugars to a fresh scratch measurement plus a conditional
    // flip; q = |+> adds a Hadamard.
    int k = ++site_counter;
    std::string tmp = "m__" + std::to_string(k);
    extra_decls.push_back(Decl{Decl::Kind::Bool, tmp, 0, s->line, s->col});

    auto m = std::make_shared<Stmt>();
    m->op = SOp::Measure;
    m->var = tmp;
    m->reg = s->reg;
    m->line = s->line;
    m->col = s->col;

    auto flip = std::make_shared<Stmt>();
    flip->op = SOp::Apply;
    flip->regs = {s->reg};
    flip->unitary.kind = GateKind::X;
    flip->line = s->line;
    flip->col = s->col;

    auto iff = std::make_shared<Stmt>();
    iff->op = SOp::If;
    iff->bexp = make_bool_var(tmp);
    iff->s1 = flip;
    iff->s2 = make_stmt(SOp::Skip);
    iff->line = s->line;
    iff->col = s->col;

    StmtPtr out = make_seq(m, iff);
    if (s->op == SOp::PrepPlus) {
      auto h = std::make_shared<Stmt>();
      h->op = SOp::Apply;
      h->regs = {s->reg};
      h->unitary.kind = GateKind::H;
      h->line = s->line;
      h->col = s->col;
      out = make_seq(out, h);
    }
    return out;
  }

  StmtPtr expand_call(const StmtPtr& s) {
    auto it = procs.find(s->var);
    if (it == procs.end())
      fail(ErrorKind::Type, "call to unknown procedure '" + s->var + "'", s->line, s->col);
    const Proc& pr = *it->second;
    if (pr.params.size() != s->regs.size())
      fail(ErrorKind::Type,
           "procedure '" + pr.name + "' expects " + std::to_string(pr.params.size()) +
               " arguments, got " + std::to_string(s->regs.size()),
           s->line, s->col);
    for (const auto& n : call_stack)
      if (n == pr.name)
        fail(ErrorKind::Type, "recursive call to procedure '" + pr.name + "'", s->line, s->col);

    int k = ++site_counter;
    Renaming ren;
    std::set<std::string> known = declared;
    for (std::size_t i = 0; i < pr.params.size(); ++i) {
      ren[pr.params[i]] = s->regs[i];
      known.insert(pr.params[i]);
    }
    std::unordered_map<std::string, UseKind> uses;
    collect_stmt_uses(pr.body, known, uses);
    for (const auto& [name, kind] : uses) {
      std::string fresh = name + "__" + std::to_string(k);
      ren[name] = fresh;
      switch (kind) {
        case UseKind::Bool:
          extra_decls.push_back(Decl{Decl::Kind::Bool, fresh, 0, s->line, s->col});
          break;
        case UseKind::Int:
          extra_decls.push_back(Decl{Decl::Kind::Int, fresh, 0, s->line, s->col});
          break;
        case UseKind::QReg:
          extra_decls.push_back(Decl{Decl::Kind::QReg, fresh, 2, s->line, s->col});
          break;
      }
      declared.insert(fresh);
    }
    call_stack.push_back(pr.name);
    StmtPtr body = expand_stmt(rename_stmt(pr.body, ren));
    call_stack.pop_back();
    return body;
  }
};

// --- validation --------------------------------------------------------------

struct Validator {
  const Program& p;
  VarTable vt;
  std::unordered_set<std::string> labels;
  bool allow_calls;

  explicit Validator(const Program& prog) : p(prog), allow_calls(!prog.procs.empty()) {}

  void check_aexp(const AExpPtr& e) {
    if (!e) fail(ErrorKind::Internal, "missing arithmetic expression");
    switch (e->op) {
      case AOp::Num:
        break;
      case AOp::Var: {
        int i = vt.find_int(e->var);
        if (i < 0) fail(ErrorKind::Type, "'" + e->var + "' is not an int variable", e->line, e->col);
        e->resolved = i;
        break;
      }
      default:
        check_aexp(e->lhs);
        check_aexp(e->rhs);
    }
  }

  void check_bexp(const BExpPtr& e) {
    if (!e) fail(ErrorKind::Internal, "missing boolean expression");
    switch (e->op) {
      case BOp::Lit:
        break;
      case BOp::Var: {
        int i = vt.find_bool(e->var);
        if (i < 0)
          fail(ErrorKind::Type, "'" + e->var + "' is not a bool variable", e->line, e->col);
        e->resolved = i;
        break;
      }
      case BOp::Not:
        check_bexp(e->blhs);
        break;
      case BOp::And:
      case BOp::Or:
        check_bexp(e->blhs);
        check_bexp(e->brhs);
        break;
      default:
        check_aexp(e->alhs);
        check_aexp(e->arhs);
    }
  }

  int reg_of(const std::string& n, int line, int col) {
    int i = vt.find_reg(n);
    if (i < 0) fail(ErrorKind::Type, "'" + n + "' is not a quantum register", line, col);
    return i;
  }

  void check_apply(const Stmt& s) {
    s.resolved_regs.clear();
    std::unordered_set<int> seen;
    for (const auto& r : s.regs) {
      int i = reg_of(r, s.line, s.col);
      if (!seen.insert(i).second)
        fail(ErrorKind::Type, "register '" + r + "' listed twice in a gate application", s.line,
             s.col);
      s.resolved_regs.push_back(i);
    }
    std::vector<int> dims;
    for (int i : s.resolved_regs) dims.push_back(vt.dims[i]);
    std::int64_t want = 1;
    for (int d : dims) want *= d;
    switch (s.unitary.kind) {
      case GateKind::H:
      case GateKind::X:
      case GateKind::T:
        if (dims.size() != 1 || dims[0] != 2)
          fail(ErrorKind::Dimension,
               std::string(gate_name(s.unitary.kind)) + " applies to one 2-dimensional register",
               s.line, s.col);
        break;
      case GateKind::CNOT:
      case GateKind::CZ:
        if (dims.size() != 2 || dims[0] != 2 || dims[1] != 2)
          fail(ErrorKind::Dimension,
               std::string(gate_name(s.unitary.kind)) + " applies to two 2-dimensional registers",
               s.line, s.col);
        break;
      case GateKind::SHIFT:
        if (dims.size() != 2 || dims[0] != 2)
          fail(ErrorKind::Dimension,
               "SHIFT applies to a 2-dimensional direction register and a position register",
               s.line, s.col);
        break;
      case GateKind::Matrix: {
        const Matrix& m = s.unitary.mat;
        if (static_cast<std::int64_t>(m.size()) != want ||
            static_cast<std::int64_t>(m[0].size()) != want)
          fail(ErrorKind::Dimension,
               "matrix is " + std::to_string(m.size()) + "x" + std::to_string(m[0].size()) +
                   " but the listed registers span dimension " + std::to_string(want),
               s.line, s.col);
        if (!is_unitary(m))
          fail(ErrorKind::Dimension, "matrix literal is not unitary (tolerance 1e-9)", s.line,
               s.col);
        break;
      }
    }
  }

  void check_stmt(const StmtPtr& sp) {
    if (!sp) fail(ErrorKind::Internal, "missing statement");
    const Stmt& s = *sp;
    switch (s.op) {
      case SOp::Skip:
        break;
      case SOp::AssignBool: {
        int i = vt.find_bool(s.var);
        if (i < 0) fail(ErrorKind::Type, "'" + s.var + "' is not a bool variable", s.line, s.col);
        s.resolved_var = i;
        check_bexp(s.bexp);
        break;
      }
      case SOp::AssignInt: {
        int i = vt.find_int(s.var);
        if (i < 0) fail(ErrorKind::Type, "'" + s.var + "' is not an int variable", s.line, s.col);
        s.resolved_var = i;
        check_aexp(s.aexp);
        break;
      }
      case SOp::Apply:
        check_apply(s);
        break;
      case SOp::Measure:
      case SOp::MeasureZero: {
        int i = vt.find_bool(s.var);
        if (i < 0) fail(ErrorKind::Type, "'" + s.var + "' is not a bool variable", s.line, s.col);
        s.resolved_var = i;
        int r = reg_of(s.reg, s.line, s.col);
        s.resolved_reg = r;
        if (s.op == SOp::Measure && vt.dims[r] != 2)
          fail(ErrorKind::Dimension,
               "meas needs a 2-dimensional register; use measzero for '" + s.reg + "'", s.line,
               s.col);
        break;
      }
      case SOp::Consume:
        check_aexp(s.aexp);
        break;
      case SOp::Seq:
        check_stmt(s.s1);
        check_stmt(s.s2);
        break;
      case SOp::If:
        check_bexp(s.bexp);
        check_stmt(s.s1);
        check_stmt(s.s2);
        break;
      case SOp::While:
        check_bexp(s.bexp);
        check_stmt(s.s1);
        break;
      case SOp::Summarized:
        if (!labels.insert(s.var).second)
          fail(ErrorKind::Type, "duplicate summary label '" + s.var + "'", s.line, s.col);
        check_stmt(s.s1);
        break;
      case SOp::Call: {
        if (!allow_calls)
          fail(ErrorKind::Internal, "call survived macro expansion", s.line, s.col);
        const Proc* pr = nullptr;
        for (const auto& q : p.procs)
          if (q.name == s.var) pr = &q;
        if (!pr) fail(ErrorKind::Type, "call to unknown procedure '" + s.var + "'", s.line, s.col);
        if (pr->params.size() != s.regs.size())
          fail(ErrorKind::Type, "wrong arity in call to '" + s.var + "'", s.line, s.col);
        break;
      }
      case SOp::PrepZero:
      case SOp::PrepPlus: {
        int r = reg_of(s.reg, s.line, s.col);
        s.resolved_reg = r;
        if (vt.dims[r] != 2)
          fail(ErrorKind::Dimension, "state preparation targets a 2-dimensional register", s.line,
               s.col);
        break;
      }
    }
  }

  VarTable run() {
    std::unordered_set<std::string> names;
    for (const auto& d : p.decls) {
      if (!names.insert(d.id).second)
        fail(ErrorKind::Type, "duplicate declaration of '" + d.id + "'", d.line, d.col);
      switch (d.kind) {
        case Decl::Kind::Bool:
          vt.bool_idx[d.id] = static_cast<int>(vt.bools.size());
          vt.bools.push_back(d.id);
          break;
        case Decl::Kind::Int:
          vt.int_idx[d.id] = static_cast<int>(vt.ints.size());
          vt.ints.push_back(d.id);
          break;
        case Decl::Kind::QReg:
          if (d.dim < 2)
            fail(ErrorKind::Dimension, "register '" + d.id + "' needs dimension >= 2", d.line,
                 d.col);
          vt.reg_idx[d.id] = static_cast<int>(vt.regs.size());
          vt.regs.push_back(d.id);
          vt.dims.push_back(d.dim);
          break;
      }
    }
    vt.total_dim = 1;
    for (int d : vt.dims) {
      vt.total_dim *= d;
      if (vt.total_dim > (1 << 20))
        fail(ErrorKind::Dimension, "total quantum dimension exceeds 2^20");
    }
    vt.strides.assign(vt.dims.size(), 1);
    for (int i = static_cast<int>(vt.dims.size()) - 2; i >= 0; --i)
      vt.strides[i] = vt.strides[i + 1] * vt.dims[i + 1];
    if (p.body) check_stmt(p.body);
    return vt;
  }
};

}  // namespace

Program expand_macros(const Program& p) {
  Expander ex(p);
  Program out;
  out.decls = p.decls;
  out.body = ex.expand_stmt(p.body);
  for (auto& d : ex.extra_decls) out.decls.push_back(std::move(d));
  return out;
}

VarTable validate(const Program& p) {
  Validator v(p);
  return v.run();
}

Program load_program(const std::string& text, VarTable& vt) {
  Program parsed = parse_program(text);
  Program expanded = expand_macros(parsed);
  vt = validate(expanded);
  return expanded;
}

}  // namespace qet
