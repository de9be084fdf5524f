#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qet/cost.hpp"
#include "qet/errors.hpp"
#include "qet/pars.hpp"
#include "qet/state.hpp"
#include "qet/summary.hpp"

namespace qet {

struct FixpointCfg {
  int max_iter = 10000;
  double tol = 1e-9;
  double ceiling = 1e12;          // divergence ceiling on loop iterates
  std::int64_t state_cap = 200000;  // distinct loop-entry states tracked per loop
};

// Exact: no loop was involved. ConvergedLowerBound: every fixpoint iteration
// stabilized within tol; the value is a lower bound whose distance to the
// limit is governed by the tolerance. IterationCapLowerBound: max_iter hit.
// Divergent: an iterate crossed the ceiling.
enum class WpStatus { Exact, ConvergedLowerBound, IterationCapLowerBound, Divergent };

const char* wp_status_name(WpStatus s);

template <class S>
struct WpResult {
  typename S::Value value;
  WpStatus status = WpStatus::Exact;
  long loop_iterations = 0;
};

// ---------------------------------------------------------------------------
// Backward expectation-transformer engine, templated over the cost structure.
// Evaluates the transformer applied to a continuation at one machine state.
// Loops run a Kleene iteration from bottom over the set of loop-entry states
// discovered along the way; iterates are monotone (checked) and each round's
// value is a sound lower bound of the least fixpoint.
// ---------------------------------------------------------------------------

template <class S>
class WpEngine {
 public:
  using Value = typename S::Value;
  using Cont = std::function<Value(const MachineState&)>;

  WpEngine(const VarTable& vt, S alg, FixpointCfg cfg)
      : vt_(vt), alg_(std::move(alg)), cfg_(cfg) {}

  // Checker hooks. `summaries`: labeled statements evaluated via their
  // summary instead of their body. `loop_bounds`: specific While nodes
  // replaced by a caller-supplied bound (used when certifying derived
  // summaries). `forbid_loops`: any other While raises Error{Type}.
  const SummaryTable* summaries = nullptr;
  std::unordered_map<const Stmt*, Cont> loop_bounds;
  bool forbid_loops = false;

  WpStatus status() const { return status_; }
  long loop_iterations() const { return iterations_; }

  Value eval(const Stmt* s, const Cont& f, const MachineState& st) {
    switch (s->op) {
      case SOp::Skip:
        return f(st);
      case SOp::AssignBool: {
        MachineState t = st;
        t.store.bools[s->resolved_var] = eval_bexp(*s->bexp, st.store) ? 1 : 0;
        return f(t);
      }
      case SOp::AssignInt: {
        MachineState t = st;
        t.store.ints[s->resolved_var] = eval_aexp(*s->aexp, st.store);
        return f(t);
      }
      case SOp::Apply: {
        MachineState t = st;
        t.amps = apply_unitary(vt_, st.amps, s->resolved_regs, gate_matrix(s));
        return f(t);
      }
      case SOp::Measure:
      case SOp::MeasureZero: {
        auto branches = measure(vt_, st.amps, s->resolved_reg, s->op == SOp::MeasureZero);
        std::vector<std::pair<double, Value>> terms;
        terms.reserve(branches.size());
        for (const auto& br : branches) {
          MachineState t;
          t.store = st.store;
          t.store.bools[s->resolved_var] = br.outcome != 0 ? 1 : 0;
          t.amps = br.post;
          terms.emplace_back(br.prob, f(t));
        }
        return alg_.combine(terms);
      }
      case SOp::Consume: {
        double c = std::max(static_cast<double>(eval_aexp(*s->aexp, st.store)), 0.0);
        return alg_.cost_add(c, f(st));
      }
      case SOp::Seq: {
        const Stmt* s2 = s->s2.get();
        Cont mid = [this, s2, &f](const MachineState& t) { return eval(s2, f, t); };
        return eval(s->s1.get(), mid, st);
      }
      case SOp::If:
        return eval(eval_bexp(*s->bexp, st.store) ? s->s1.get() : s->s2.get(), f, st);
      case SOp::While: {
        auto lb = loop_bounds.find(s);
        if (lb != loop_bounds.end()) return lb->second(st);
        if (forbid_loops)
          fail(ErrorKind::Type,
               "loop without a certified summary in a loop-free context (line " +
                   std::to_string(s->line) + ")");
        return while_fix(s, f, st);
      }
      case SOp::Summarized: {
        if (summaries) {
          auto it = summaries->find(s->var);
          if (it != summaries->end()) return apply_summary(it->second, f, st);
        }
        return eval(s->s1.get(), f, st);
      }
      case SOp::Call:
      case SOp::PrepZero:
      case SOp::PrepPlus:
        fail(ErrorKind::Internal, "transformer applied to an unexpanded program");
    }
    fail(ErrorKind::Internal, "unhandled statement kind");
  }

 private:
  Value apply_summary(const Summary& sm, const Cont& f, const MachineState& st) {
    std::vector<std::pair<double, Value>> terms;
    terms.reserve(sm.outcomes.size());
    for (const auto& o : sm.outcomes) terms.emplace_back(o.prob, f(apply_summary_outcome(st, o)));
    return alg_.cost_add(sm.cost, alg_.combine(terms));
  }

  Value while_fix(const Stmt* w, const Cont& f, const MachineState& st0) {
    std::vector<MachineState> states;
    std::vector<Value> cur;
    // continuation values for guard-false entries, computed once per state:
    // f is pure, and re-running it each iteration compounds badly when the
    // continuation itself contains fixpoints (nested loops)
    std::vector<char> fknown;
    std::vector<Value> fmemo;
    std::unordered_map<std::uint64_t, std::vector<int>> index;

    auto intern = [&](const MachineState& t) -> std::pair<int, bool> {
      std::uint64_t sig = state_sig(t);
      auto& cands = index[sig];
      for (int i : cands)
        if (states_equivalent(states[i], t)) return {i, false};
      if (static_cast<std::int64_t>(states.size()) >= cfg_.state_cap)
        fail(ErrorKind::Cap, "loop-entry state cap exceeded");
      states.push_back(t);
      cur.push_back(alg_.bot());
      fknown.push_back(0);
      fmemo.push_back(alg_.bot());
      cands.push_back(static_cast<int>(states.size()) - 1);
      return {static_cast<int>(states.size()) - 1, true};
    };

    intern(st0);
    for (int it = 1; it <= cfg_.max_iter; ++it) {
      ++iterations_;
      std::vector<Value> prev = cur;
      std::size_t snapshot = states.size();
      bool changed = false;
      bool grew = false;
      Cont lookup = [&](const MachineState& t) -> Value {
        auto [i, isnew] = intern(t);
        if (isnew) {
          grew = true;
          return alg_.bot();
        }
        return static_cast<std::size_t>(i) < prev.size() ? prev[i] : alg_.bot();
      };
      for (std::size_t i = 0; i < snapshot; ++i) {
        MachineState sti = states[i];  // copy: `states` may grow during eval
        Value v;
        if (eval_bexp(*w->bexp, sti.store)) {
          v = eval(w->s1.get(), lookup, sti);
        } else {
          if (!fknown[i]) {
            fmemo[i] = f(sti);
            fknown[i] = 1;
          }
          v = fmemo[i];
        }
        if (!alg_.leq(prev[i], v, 1e-7))
          fail(ErrorKind::Internal, "fixpoint iterate decreased; transformer not monotone");
        if (!alg_.approx_eq(v, cur[i], cfg_.tol)) changed = true;
        cur[i] = v;
      }
      bool over = false;
      for (const auto& v : cur)
        if (alg_.diverged(v, cfg_.ceiling)) over = true;
      if (over) {
        raise_status(WpStatus::Divergent);
        return cur[0];
      }
      if (!changed && !grew) {
        raise_status(WpStatus::ConvergedLowerBound);
        return cur[0];
      }
    }
    raise_status(WpStatus::IterationCapLowerBound);
    return cur[0];
  }

  const Matrix& gate_matrix(const Stmt* s) {
    auto it = gate_cache_.find(s);
    if (it != gate_cache_.end()) return it->second;
    return gate_cache_.emplace(s, stmt_gate_matrix(vt_, *s)).first->second;
  }

  void raise_status(WpStatus st) {
    if (static_cast<int>(st) > static_cast<int>(status_)) status_ = st;
  }

  const VarTable& vt_;
  S alg_;
  FixpointCfg cfg_;
  WpStatus status_ = WpStatus::Exact;
  long iterations_ = 0;
  std::unordered_map<const Stmt*, Matrix> gate_cache_;
};

template <class S>
WpResult<S> wp_eval(const VarTable& vt, S alg, const Stmt* body,
                    const std::function<typename S::Value(const MachineState&)>& f,
                    const MachineState& init, const FixpointCfg& cfg,
                    const SummaryTable* summaries = nullptr) {
  WpEngine<S> eng(vt, std::move(alg), cfg);
  eng.summaries = summaries;
  WpResult<S> r;
  r.value = eng.eval(body, f, init);
  r.status = eng.status();
  r.loop_iterations = eng.loop_iterations();
  if (r.status == WpStatus::Divergent) {
    if constexpr (std::is_same_v<typename S::Value, double>) r.value = kInf;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Stage-n transformer: unrolls the small-step relation to depth n, so it is
// defined for any program and needs no fixpoints. Configurations reached at
// equal depth are shared through a memo keyed on frames + state.
// ---------------------------------------------------------------------------

template <class S>
typename S::Value wp_step_indexed(const VarTable& vt, S alg, const Config& cfg0, int n,
                                  const std::function<typename S::Value(const MachineState&)>& f) {
  using Value = typename S::Value;
  struct Entry {
    Config cfg;
    std::unordered_map<int, Value> by_depth;
  };
  std::vector<Entry> entries;
  std::unordered_map<std::uint64_t, std::vector<int>> index;

  auto config_sig = [](const Config& c) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
      h ^= x;
      h *= 1099511628211ull;
    };
    for (const Stmt* s : c.frames) mix(reinterpret_cast<std::uintptr_t>(s));
    mix(state_sig(c.state));
    return h;
  };
  auto config_equiv = [](const Config& a, const Config& b) {
    return a.frames == b.frames && states_equivalent(a.state, b.state);
  };
  auto intern = [&](const Config& c) -> int {
    std::uint64_t sig = config_sig(c);
    auto& cands = index[sig];
    for (int i : cands)
      if (config_equiv(entries[i].cfg, c)) return i;
    entries.push_back(Entry{c, {}});
    cands.push_back(static_cast<int>(entries.size()) - 1);
    return static_cast<int>(entries.size()) - 1;
  };

  std::function<Value(int, int)> rec = [&](int idx, int depth) -> Value {
    Config cfg = entries[idx].cfg;  // copy: `entries` may grow below
    // terminal configurations are fixed points of the step relation, so they
    // yield the continuation at every stage, including stage zero
    if (cfg.terminal()) return f(cfg.state);
    if (depth == 0) return alg.bot();
    auto& memo = entries[idx].by_depth;
    auto hit = memo.find(depth);
    if (hit != memo.end()) return hit->second;
    StepResult sr = step(vt, cfg);
    std::vector<std::pair<double, Value>> terms;
    terms.reserve(sr.branches.size());
    for (auto& br : sr.branches) {
      int child = intern(br.cfg);
      terms.emplace_back(br.prob, rec(child, depth - 1));
    }
    Value v = alg.cost_add(sr.cost, alg.combine(terms));
    entries[idx].by_depth.emplace(depth, v);
    return v;
  };

  return rec(intern(cfg0), n);
}

}  // namespace qet
