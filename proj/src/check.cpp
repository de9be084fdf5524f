#include "qet/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "qet/errors.hpp"
#include "qet/sexpr.hpp"

namespace qet {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// --- classical variable footprints ------------------------------------------

struct VarSet {
  std::set<int> bools;
  std::set<int> ints;

  bool intersects(const VarSet& o) const {
    for (int b : bools)
      if (o.bools.count(b)) return true;
    for (int i : ints)
      if (o.ints.count(i)) return true;
    return false;
  }
  void merge(const VarSet& o) {
    bools.insert(o.bools.begin(), o.bools.end());
    ints.insert(o.ints.begin(), o.ints.end());
  }
};

void aexp_reads(const AExp& e, VarSet& out) {
  if (e.op == AOp::Var) out.ints.insert(e.resolved);
  if (e.lhs) aexp_reads(*e.lhs, out);
  if (e.rhs) aexp_reads(*e.rhs, out);
}

void bexp_reads(const BExp& e, VarSet& out) {
  if (e.op == BOp::Var) out.bools.insert(e.resolved);
  if (e.blhs) bexp_reads(*e.blhs, out);
  if (e.brhs) bexp_reads(*e.brhs, out);
  if (e.alhs) aexp_reads(*e.alhs, out);
  if (e.arhs) aexp_reads(*e.arhs, out);
}

// classical variables a statement may assign (measure targets included)
void assigned_vars(const Stmt& s, VarSet& out) {
  switch (s.op) {
    case SOp::AssignBool:
    case SOp::Measure:
    case SOp::MeasureZero:
      out.bools.insert(s.resolved_var);
      break;
    case SOp::AssignInt:
      out.ints.insert(s.resolved_var);
      break;
    default:
      break;
  }
  if (s.s1) assigned_vars(*s.s1, out);
  if (s.s2) assigned_vars(*s.s2, out);
}

// quantum registers a statement may touch
void touched_regs(const Stmt& s, std::set<int>& out) {
  switch (s.op) {
    case SOp::Apply:
      for (int r : s.resolved_regs) out.insert(r);
      break;
    case SOp::Measure:
    case SOp::MeasureZero:
      out.insert(s.resolved_reg);
      break;
    default:
      break;
  }
  if (s.s1) touched_regs(*s.s1, out);
  if (s.s2) touched_regs(*s.s2, out);
}

// --- liveness ----------------------------------------------------------------

// Backward liveness of classical variables. For each summarized node with an
// entry in `table` records the live set of its continuation, which is what
// the substitution guard inspects.
VarSet live_pass(const Stmt& s, VarSet out, const SummaryTable* table,
                 std::map<const Stmt*, VarSet>& at_summary) {
  switch (s.op) {
    case SOp::Skip:
    case SOp::Apply:
      return out;
    case SOp::AssignBool: {
      out.bools.erase(s.resolved_var);
      bexp_reads(*s.bexp, out);
      return out;
    }
    case SOp::AssignInt: {
      out.ints.erase(s.resolved_var);
      aexp_reads(*s.aexp, out);
      return out;
    }
    case SOp::Measure:
    case SOp::MeasureZero:
      out.bools.erase(s.resolved_var);
      return out;
    case SOp::Consume:
      aexp_reads(*s.aexp, out);
      return out;
    case SOp::Seq: {
      VarSet mid = live_pass(*s.s2, std::move(out), table, at_summary);
      return live_pass(*s.s1, std::move(mid), table, at_summary);
    }
    case SOp::If: {
      VarSet a = live_pass(*s.s1, out, table, at_summary);
      VarSet b = live_pass(*s.s2, out, table, at_summary);
      a.merge(b);
      bexp_reads(*s.bexp, a);
      return a;
    }
    case SOp::While: {
      // fixpoint of live = out ∪ reads(guard) ∪ live(body, live); two rounds
      // reach it because the lattice has height one per variable
      VarSet live = out;
      bexp_reads(*s.bexp, live);
      for (int round = 0; round < 2; ++round) {
        VarSet body = live_pass(*s.s1, live, table, at_summary);
        live.merge(body);
        bexp_reads(*s.bexp, live);
      }
      return live;
    }
    case SOp::Summarized: {
      if (table && table->count(s.var)) {
        at_summary[&s] = out;
        // summaries read no classical state; described variables may be
        // written but conservatively nothing is killed
        return out;
      }
      return live_pass(*s.s1, std::move(out), table, at_summary);
    }
    default:
      fail(ErrorKind::Internal, "liveness over an unexpanded statement");
  }
}

std::string name_of_bool(const VarTable& vt, int i) { return vt.bools[i]; }
std::string name_of_int(const VarTable& vt, int i) { return vt.ints[i]; }

// Guard for substituting summaries inside `root` under a continuation that
// reads `cont_vars`: variables a summarized statement assigns but does not
// describe must be dead at its use site. Returns an error string on refusal.
std::string guard_summary_uses(const VarTable& vt, const Stmt& root, const SummaryTable& table,
                               const VarSet& cont_vars) {
  std::map<const Stmt*, VarSet> at_summary;
  live_pass(root, cont_vars, &table, at_summary);
  for (const auto& [node, live] : at_summary) {
    const Summary& sm = table.at(node->var);
    VarSet assigned;
    assigned_vars(*node->s1, assigned);
    VarSet described;
    for (const auto& o : sm.outcomes)
      for (const auto& u : o.updates) {
        if (u.bool_idx >= 0) described.bools.insert(u.bool_idx);
        if (u.int_idx >= 0) described.ints.insert(u.int_idx);
      }
    for (int b : described.bools) assigned.bools.erase(b);
    for (int i : described.ints) assigned.ints.erase(i);
    for (int b : assigned.bools)
      if (live.bools.count(b))
        return "summary '" + sm.label + "' assigns '" + name_of_bool(vt, b) +
               "' without describing it, and the continuation reads it";
    for (int i : assigned.ints)
      if (live.ints.count(i))
        return "summary '" + sm.label + "' assigns '" + name_of_int(vt, i) +
               "' without describing it, and the continuation reads it";
  }
  return "";
}

bool root_uses_summaries(const Stmt& root, const SummaryTable& table) {
  if (root.op == SOp::Summarized && table.count(root.var)) return true;
  if (root.op == SOp::Summarized) return root.s1 && root_uses_summaries(*root.s1, table);
  if (root.s1 && root_uses_summaries(*root.s1, table)) return true;
  if (root.s2 && root_uses_summaries(*root.s2, table)) return true;
  return false;
}

VarSet expectation_var_set(const ExpectationExpr& e, const VarTable& vt) {
  std::vector<std::string> bs, is;
  expectation_vars(e, bs, is);
  VarSet out;
  for (const auto& b : bs) out.bools.insert(vt.find_bool(b));
  for (const auto& i : is) out.ints.insert(vt.find_int(i));
  return out;
}

// uncovered loops: While nodes not under a summarized label present in table
std::vector<const Stmt*> uncovered(const Stmt& s, const SummaryTable& table) {
  std::vector<const Stmt*> out;
  std::function<void(const Stmt&)> go = [&](const Stmt& n) {
    if (n.op == SOp::Summarized && table.count(n.var)) return;
    if (n.op == SOp::While) out.push_back(&n);
    if (n.s1) go(*n.s1);
    if (n.s2) go(*n.s2);
  };
  go(s);
  return out;
}

// --- expectation continuations ------------------------------------------------

using EcostCont = std::function<double(const MachineState&)>;

EcostCont cont_of(const ExpPtr& e) {
  return [e](const MachineState& s) { return eval_expectation(*e, s); };
}

double qect_eval(const VarTable& vt, const Stmt* root, const EcostCont& f,
                 const MachineState& st, const SummaryTable* summaries, const FixpointCfg& cfg,
                 bool forbid_loops,
                 const std::unordered_map<const Stmt*, EcostCont>* loop_bounds = nullptr) {
  WpEngine<EcostStructure> eng(vt, EcostStructure{}, cfg);
  eng.summaries = summaries;
  eng.forbid_loops = forbid_loops;
  if (loop_bounds) eng.loop_bounds = *loop_bounds;
  return eng.eval(root, f, st);
}

// --- basis expectations for summary checks -------------------------------------

struct BasisExp {
  std::string name;
  ExpPtr e;
};

std::vector<BasisExp> summary_basis(const VarTable& vt, const Summary& sm) {
  std::vector<BasisExp> out;
  out.push_back({"1", exp_const(1.0)});
  std::vector<std::string> bools;
  for (const auto& v : summary_described_vars(sm)) {
    if (vt.find_bool(v) >= 0) {
      bools.push_back(v);
      out.push_back({"[" + v + "]", exp_ind(make_bool_var(v))});
      out.push_back({"[!" + v + "]", exp_ind(make_not(make_bool_var(v)))});
    } else {
      std::set<std::int64_t> vals;
      for (const auto& o : sm.outcomes)
        for (const auto& u : o.updates)
          if (u.var == v) vals.insert(u.value);
      for (std::int64_t c : vals)
        out.push_back({"[" + v + "=" + std::to_string(c) + "]",
                       exp_ind(make_cmp(BOp::Eq, make_int_var(v), make_num(c)))});
      out.push_back({"max(" + v + ",0)", exp_arith(make_int_var(v))});
    }
  }
  for (std::size_t i = 0; i < bools.size(); ++i)
    for (std::size_t j = i + 1; j < bools.size(); ++j)
      out.push_back({"[" + bools[i] + "][" + bools[j] + "]",
                     exp_nary(EOp::Mul, {exp_ind(make_bool_var(bools[i])),
                                         exp_ind(make_bool_var(bools[j]))})});
  for (auto& b : out) resolve_expectation(*b.e, vt);
  return out;
}

double summary_rhs(const Summary& sm, const ExpectationExpr& kappa, const MachineState& st) {
  double acc = sm.cost;
  for (const auto& o : sm.outcomes)
    acc += ext_scale(o.prob, eval_expectation(kappa, apply_summary_outcome(st, o)));
  return acc;
}

}  // namespace

// --- sidecar parsing -----------------------------------------------------------

SidecarFile parse_sidecar(const std::string& text) {
  SidecarFile out;
  auto nodes = parse_sexprs(text);
  for (const auto& n : nodes) {
    if (n.kind != SNode::Kind::List || n.items.empty() || n.items[0].kind != SNode::Kind::Sym)
      fail(ErrorKind::Syntax, "expected (post ...), (invariant ...) or (summary ...)", n.line,
           n.col);
    const std::string& head = n.items[0].sym;
    if (head == "post") {
      if (n.items.size() != 2) fail(ErrorKind::Syntax, "(post e) expects one expression", n.line, n.col);
      out.post = parse_expectation_node(n.items[1]);
    } else if (head == "invariant") {
      if (n.items.size() != 3 || n.items[1].kind != SNode::Kind::Sym)
        fail(ErrorKind::Syntax, "(invariant label e) expects a label and an expression", n.line,
             n.col);
      out.invariants.emplace_back(n.items[1].sym, parse_expectation_node(n.items[2]));
    } else if (head == "summary") {
      if (n.items.size() < 3 || n.items[1].kind != SNode::Kind::Sym)
        fail(ErrorKind::Syntax, "(summary label (cost c) (outcome p ((x v)...)) ...)", n.line,
             n.col);
      Summary sm;
      sm.label = n.items[1].sym;
      bool saw_cost = false;
      for (std::size_t i = 2; i < n.items.size(); ++i) {
        const SNode& part = n.items[i];
        if (part.kind != SNode::Kind::List || part.items.empty() ||
            part.items[0].kind != SNode::Kind::Sym)
          fail(ErrorKind::Syntax, "bad summary clause", part.line, part.col);
        const std::string& key = part.items[0].sym;
        if (key == "le") {
          sm.upper_only = true;
        } else if (key == "cost") {
          if (part.items.size() != 2 || part.items[1].kind != SNode::Kind::Num)
            fail(ErrorKind::Syntax, "(cost c) expects one number", part.line, part.col);
          sm.cost = part.items[1].num;
          saw_cost = true;
        } else if (key == "outcome") {
          if (part.items.size() != 3 || part.items[1].kind != SNode::Kind::Num ||
              part.items[2].kind != SNode::Kind::List)
            fail(ErrorKind::Syntax, "(outcome p ((x v) ...)) expects a probability and updates",
                 part.line, part.col);
          SummaryOutcome o;
          o.prob = part.items[1].num;
          for (const auto& upd : part.items[2].items) {
            if (upd.kind != SNode::Kind::List || upd.items.size() != 2 ||
                upd.items[0].kind != SNode::Kind::Sym || upd.items[1].kind != SNode::Kind::Num ||
                !upd.items[1].integral)
              fail(ErrorKind::Syntax, "updates are ((var intvalue) ...)", upd.line, upd.col);
            SummaryUpdate u;
            u.var = upd.items[0].sym;
            u.value = upd.items[1].inum;
            o.updates.push_back(std::move(u));
          }
          sm.outcomes.push_back(std::move(o));
        } else {
          fail(ErrorKind::Syntax, "unknown summary clause '" + key + "'", part.line, part.col);
        }
      }
      if (!saw_cost)
        fail(ErrorKind::Syntax, "summary '" + sm.label + "' is missing (cost c)", n.line, n.col);
      out.summaries.push_back(std::move(sm));
    } else {
      fail(ErrorKind::Syntax, "unknown sidecar form '" + head + "'", n.line, n.col);
    }
  }
  if (!out.post) out.post = exp_const(0.0);
  return out;
}

// --- label collection ------------------------------------------------------------

LabelMap collect_labels(const Program& p) {
  LabelMap lm;
  std::function<void(const StmtPtr&)> go = [&](const StmtPtr& s) {
    if (!s) return;
    if (s->op == SOp::Summarized) lm.labels[s->var] = s.get();
    if (s->op == SOp::While) lm.loops.push_back(s.get());
    go(s->s1);
    go(s->s2);
  };
  go(p.body);
  return lm;
}

const Stmt* LabelMap::find(const std::string& name) const {
  auto it = labels.find(name);
  if (it != labels.end()) return it->second;
  if (name.rfind("loop", 0) == 0) {
    std::size_t k = std::strtoul(name.c_str() + 4, nullptr, 10);
    if (k < loops.size()) return loops[k];
  }
  return nullptr;
}

// --- invariant check ---------------------------------------------------------------

InvariantReport check_upper_invariant(const VarTable& vt, const Stmt* loop, const ExpPtr& f,
                                      const ExpPtr& g, const std::vector<MachineState>& suite,
                                      const SummaryTable& summaries, const CheckOptions& opt) {
  InvariantReport rep;
  rep.worst_exit_residual = kInf;
  rep.worst_step_residual = kInf;
  if (loop->op != SOp::While) {
    rep.detail = "invariant target is not a while loop";
    return rep;
  }
  resolve_expectation(*f, vt);
  resolve_expectation(*g, vt);

  auto leftovers = uncovered(*loop->s1, summaries);
  if (!leftovers.empty()) {
    rep.detail = "loop body contains an inner loop without a certified summary (line " +
                 std::to_string(leftovers[0]->line) + ")";
    return rep;
  }
  if (root_uses_summaries(*loop->s1, summaries)) {
    if (!classical_check(*g) || !classical_check(*f)) {
      rep.detail = "summaries require classical invariants and post-expectations";
      return rep;
    }
    VarSet cont = expectation_var_set(*g, vt);
    bexp_reads(*loop->bexp, cont);
    std::string err = guard_summary_uses(vt, *loop->s1, summaries, cont);
    if (!err.empty()) {
      rep.detail = err;
      return rep;
    }
  }

  EcostCont gc = cont_of(g);
  bool ok = true;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const MachineState& st = suite[i];
    double gv = eval_expectation(*g, st);
    if (eval_bexp(*loop->bexp, st.store)) {
      double body = qect_eval(vt, loop->s1.get(), gc, st, &summaries, opt.fix, true);
      double resid = std::isinf(gv) ? kInf : gv - body;
      if (resid < rep.worst_step_residual) rep.worst_step_residual = resid;
      if (resid < -opt.tol) {
        ok = false;
        if (rep.detail.empty())
          rep.detail = "guard state " + std::to_string(i) + ": qet[body]{g} = " + fmt(body) +
                       " exceeds g = " + fmt(gv);
      }
    } else {
      double fv = eval_expectation(*f, st);
      double resid = std::isinf(gv) ? kInf : gv - fv;
      if (resid < rep.worst_exit_residual) rep.worst_exit_residual = resid;
      if (resid < -opt.tol) {
        ok = false;
        if (rep.detail.empty())
          rep.detail = "exit state " + std::to_string(i) + ": f = " + fmt(fv) +
                       " exceeds g = " + fmt(gv);
      }
    }
  }
  if (rep.worst_exit_residual == kInf) rep.worst_exit_residual = 0.0;
  if (rep.worst_step_residual == kInf) rep.worst_step_residual = 0.0;
  rep.pass = ok;
  if (ok)
    rep.detail = "Pass on suite (" + std::to_string(suite.size()) + " states, seed " +
                 std::to_string(opt.seed) + ")";
  return rep;
}

// --- summary checks -----------------------------------------------------------------

SummaryReport check_summary(const VarTable& vt, const Stmt* stm, const Summary& sm,
                            const std::vector<MachineState>& suite, const SummaryTable& validated,
                            const CheckOptions& opt) {
  SummaryReport rep;
  rep.label = sm.label;
  rep.worst_residual = kInf;
  resolve_summary(sm, vt);

  auto leftovers = uncovered(*stm, validated);
  if (!leftovers.empty()) {
    rep.detail = "statement contains a loop (line " + std::to_string(leftovers[0]->line) +
                 "); check_summary needs a loop-free statement";
    return rep;
  }

  auto basis = summary_basis(vt, sm);
  rep.basis_size = static_cast<int>(basis.size());

  if (root_uses_summaries(*stm, validated)) {
    VarSet cont;
    for (const auto& b : basis) cont.merge(expectation_var_set(*b.e, vt));
    std::string err = guard_summary_uses(vt, *stm, validated, cont);
    if (!err.empty()) {
      rep.detail = err;
      return rep;
    }
  }

  bool ok = true;
  for (const auto& b : basis) {
    EcostCont kc = cont_of(b.e);
    for (std::size_t i = 0; i < suite.size(); ++i) {
      double lhs = qect_eval(vt, stm, kc, suite[i], &validated, opt.fix, true);
      double rhs = summary_rhs(sm, *b.e, suite[i]);
      double resid = sm.upper_only ? rhs - lhs : -std::fabs(rhs - lhs);
      if (resid < rep.worst_residual) rep.worst_residual = resid;
      if (resid < -opt.tol) {
        ok = false;
        if (rep.detail.empty())
          rep.detail = "basis " + b.name + ", state " + std::to_string(i) + ": qet[stm]{k} = " +
                       fmt(lhs) + " vs summary " + fmt(rhs);
      }
    }
  }
  rep.pass = ok;
  if (ok)
    rep.detail = "Pass on suite (" + std::to_string(suite.size()) + " states, " +
                 std::to_string(rep.basis_size) + " basis expectations)";
  return rep;
}

SummaryReport check_loop_summary(const VarTable& vt, const Stmt* stm, const Summary& sm,
                                 const std::vector<MachineState>& suite,
                                 const SummaryTable& validated, const CheckOptions& opt) {
  SummaryReport rep;
  rep.label = sm.label;
  rep.conditional = true;
  rep.worst_residual = kInf;
  resolve_summary(sm, vt);

  if (!sm.upper_only) {
    rep.detail = "summaries certified through a loop bound are upper bounds; mark them (le)";
    return rep;
  }
  if (sm.outcomes.size() != 1 || std::fabs(sm.outcomes[0].prob - 1.0) > 1e-12) {
    rep.detail = "loop summaries need a single certain outcome";
    return rep;
  }
  auto leftovers = uncovered(*stm, validated);
  if (leftovers.size() != 1) {
    rep.detail = "statement contains " + std::to_string(leftovers.size()) +
                 " uncovered loops; exactly one is supported";
    return rep;
  }
  const Stmt* w = leftovers[0];
  const SummaryOutcome& upd = sm.outcomes[0];

  auto basis = summary_basis(vt, sm);
  rep.basis_size = static_cast<int>(basis.size());

  VarSet cont;
  for (const auto& b : basis) cont.merge(expectation_var_set(*b.e, vt));
  bexp_reads(*w->bexp, cont);
  {
    std::string err = guard_summary_uses(vt, *stm, validated, cont);
    if (err.empty()) err = guard_summary_uses(vt, *w->s1, validated, cont);
    if (!err.empty()) {
      rep.detail = err;
      return rep;
    }
  }

  bool ok = true;
  for (const auto& b : basis) {
    const ExpPtr& kappa = b.e;
    // derived invariant: inside the loop the remaining cost is bounded by the
    // full claim; outside it is just the continuation
    EcostCont g_kappa = [&vt, w, &sm, &upd, kappa](const MachineState& st) -> double {
      if (eval_bexp(*w->bexp, st.store))
        return sm.cost + eval_expectation(*kappa, apply_summary_outcome(st, upd));
      return eval_expectation(*kappa, st);
    };
    // premise: one body step from a guard state stays below g_kappa
    for (std::size_t i = 0; i < suite.size() && ok; ++i) {
      const MachineState& st = suite[i];
      if (!eval_bexp(*w->bexp, st.store)) continue;
      double body = qect_eval(vt, w->s1.get(), g_kappa, st, &validated, opt.fix, true);
      double resid = g_kappa(st) - body;
      if (resid < rep.worst_residual) rep.worst_residual = resid;
      if (resid < -opt.tol) {
        ok = false;
        rep.detail = "basis " + b.name + ", guard state " + std::to_string(i) +
                     ": qet[body]{g} = " + fmt(body) + " exceeds g = " + fmt(g_kappa(st));
      }
    }
    if (!ok) break;
    // whole statement with the loop replaced by its certified bound
    std::unordered_map<const Stmt*, EcostCont> bounds;
    bounds[w] = g_kappa;
    EcostCont kc = cont_of(kappa);
    for (std::size_t i = 0; i < suite.size() && ok; ++i) {
      double lhs = qect_eval(vt, stm, kc, suite[i], &validated, opt.fix, true, &bounds);
      double rhs = summary_rhs(sm, *kappa, suite[i]);
      double resid = rhs - lhs;
      if (resid < rep.worst_residual) rep.worst_residual = resid;
      if (resid < -opt.tol) {
        ok = false;
        rep.detail = "basis " + b.name + ", state " + std::to_string(i) +
                     ": bound composition gives " + fmt(lhs) + " above the claim " + fmt(rhs);
      }
    }
    if (!ok) break;
  }
  rep.pass = ok;
  if (ok)
    rep.detail = "Pass on suite (conditional on the derived loop bound; " +
                 std::to_string(rep.basis_size) + " basis expectations)";
  return rep;
}

// --- whole-program bound ---------------------------------------------------------

namespace {

void flatten_seq(const StmtPtr& s, std::vector<StmtPtr>& out) {
  if (!s) return;
  if (s->op == SOp::Seq) {
    flatten_seq(s->s1, out);
    flatten_seq(s->s2, out);
    return;
  }
  out.push_back(s);
}

}  // namespace

BoundValue bound_whole_program(const VarTable& vt, const Program& p, const ExpPtr& post,
                               const std::optional<std::pair<const Stmt*, ExpPtr>>& tail_inv,
                               const std::vector<MachineState>& suite,
                               const SummaryTable& summaries, const CheckOptions& opt) {
  BoundValue bv;
  resolve_expectation(*post, vt);
  std::vector<StmtPtr> elems;
  flatten_seq(p.body, elems);
  if (elems.empty()) {
    bv.detail = "empty program";
    return bv;
  }

  int tail = -1;
  for (std::size_t i = 0; i < elems.size(); ++i)
    if (!uncovered(*elems[i], summaries).empty()) tail = static_cast<int>(i);

  EcostCont cont;
  std::vector<StmtPtr> prefix;
  if (tail < 0) {
    cont = cont_of(post);
    prefix = elems;
  } else {
    if (tail != static_cast<int>(elems.size()) - 1) {
      bv.detail = "statements after the final loop are not supported in a whole-program bound";
      return bv;
    }
    const Stmt* w = elems[tail].get();
    if (w->op != SOp::While || !tail_inv || tail_inv->first != w) {
      bv.detail = "the final loop has no checked invariant";
      return bv;
    }
    ExpPtr g = tail_inv->second;
    resolve_expectation(*g, vt);
    cont = cont_of(g);
    prefix.assign(elems.begin(), elems.end() - 1);
  }

  // the prefix (or the whole body) is evaluated with summaries substituted
  StmtPtr folded;
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
    folded = folded ? make_seq(*it, folded) : *it;

  auto eval_at = [&](const MachineState& st) -> double {
    if (!folded) return cont(st);
    if (root_uses_summaries(*folded, summaries)) {
      VarSet cv;
      if (tail >= 0) {
        cv = expectation_var_set(*tail_inv->second, vt);
      } else {
        cv = expectation_var_set(*post, vt);
      }
      std::string err = guard_summary_uses(vt, *folded, summaries, cv);
      if (!err.empty()) fail(ErrorKind::Type, err);
    }
    return qect_eval(vt, folded.get(), cont, st, &summaries, opt.fix, true);
  };

  MachineState init = initial_state(vt);
  bv.at_default = eval_at(init);
  bv.min_over_suite = kInf;
  bv.max_over_suite = 0.0;
  for (const auto& st : suite) {
    double v = eval_at(st);
    bv.min_over_suite = std::min(bv.min_over_suite, v);
    bv.max_over_suite = std::max(bv.max_over_suite, v);
  }
  bv.present = true;
  bv.detail = tail < 0 ? "loop-free composition" : "prefix composed with the tail-loop invariant";
  return bv;
}

// --- full pipeline ------------------------------------------------------------------

CheckReport run_check(const VarTable& vt, const Program& p, const SidecarFile& sc,
                      const CheckOptions& opt) {
  CheckReport rep;
  rep.seed = opt.seed;
  auto suite = make_suite(vt, opt.random_states, opt.seed);
  rep.suite_size = static_cast<int>(suite.size());

  LabelMap lm = collect_labels(p);

  // order summary claims innermost-first so outer claims can substitute them;
  // the key is the number of other claimed labels inside each claim's subtree
  std::vector<const Summary*> order;
  for (const auto& sm : sc.summaries) order.push_back(&sm);
  auto contains = [&](const Stmt* outer, const Stmt* inner) {
    bool found = false;
    std::function<void(const Stmt&)> go = [&](const Stmt& n) {
      if (&n == inner) found = true;
      if (n.s1) go(*n.s1);
      if (n.s2) go(*n.s2);
    };
    go(*outer);
    return found;
  };
  auto depth_key = [&](const Summary* sm) {
    const Stmt* node = lm.find(sm->label);
    if (!node) return -1;
    int k = 0;
    for (const auto& other : sc.summaries) {
      if (&other == sm) continue;
      const Stmt* on = lm.find(other.label);
      if (on && contains(node, on)) ++k;
    }
    return k;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](const Summary* a, const Summary* b) { return depth_key(a) < depth_key(b); });

  SummaryTable validated;
  bool all = true;
  for (const Summary* sm : order) {
    const Stmt* node = lm.find(sm->label);
    SummaryReport sr;
    if (!node) {
      sr.label = sm->label;
      sr.detail = "no @summary(" + sm->label + ") block in the program";
    } else {
      const Stmt* target = node->op == SOp::Summarized ? node->s1.get() : node;
      auto leftovers = uncovered(*target, validated);
      if (leftovers.empty())
        sr = check_summary(vt, target, *sm, suite, validated, opt);
      else
        sr = check_loop_summary(vt, target, *sm, suite, validated, opt);
    }
    if (sr.pass) validated[sm->label] = *sm;
    all = all && sr.pass;
    rep.summaries.push_back(std::move(sr));
  }

  std::vector<std::pair<const Stmt*, ExpPtr>> passing;
  for (const auto& [label, g] : sc.invariants) {
    const Stmt* node = lm.find(label);
    InvariantReport ir;
    ir.label = label;
    if (!node) {
      ir.detail = "unknown loop label '" + label + "'";
    } else {
      const Stmt* w = node;
      if (w->op == SOp::Summarized) {
        auto inner = uncovered(*w, SummaryTable{});
        if (inner.size() != 1) {
          ir.detail = "label '" + label + "' does not wrap a single loop";
          rep.invariants.push_back(std::move(ir));
          all = false;
          continue;
        }
        w = inner[0];
      }
      if (w->op != SOp::While) {
        ir.detail = "label '" + label + "' is not a loop";
      } else {
        ir = check_upper_invariant(vt, w, sc.post, g, suite, validated, opt);
        ir.label = label;
        if (ir.pass) passing.emplace_back(w, g);
      }
    }
    all = all && ir.pass;
    rep.invariants.push_back(std::move(ir));
  }

  // pick the invariant attached to the final top-level loop, if any
  std::optional<std::pair<const Stmt*, ExpPtr>> tail_inv;
  {
    std::vector<StmtPtr> elems;
    flatten_seq(p.body, elems);
    if (!elems.empty())
      for (const auto& [w, g] : passing)
        if (w == elems.back().get()) tail_inv = std::make_pair(w, g);
  }

  rep.bound = bound_whole_program(vt, p, sc.post, tail_inv, suite, validated, opt);
  rep.pass = all && rep.bound.present;
  return rep;
}

}  // namespace qet
