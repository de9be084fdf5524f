#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qet/expectation.hpp"
#include "qet/summary.hpp"
#include "qet/wp.hpp"

namespace qet {

// Sidecar file next to a program: optional post-expectation, loop invariants,
// and statement summaries, all as s-expressions.
//   (post <exp>)
//   (invariant <label> <exp>)
//   (summary <label> (le)? (cost <number>) (outcome <p> ((var val) ...)) ...)
// <label> names a @summary block, or loopK for the K-th while statement of
// the expanded body in program order.
struct SidecarFile {
  ExpPtr post;  // defaults to (const 0)
  std::vector<std::pair<std::string, ExpPtr>> invariants;
  std::vector<Summary> summaries;  // file order
};

SidecarFile parse_sidecar(const std::string& text);

struct CheckOptions {
  int random_states = 200;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  FixpointCfg fix;
};

struct SummaryReport {
  std::string label;
  bool pass = false;
  bool conditional = false;  // certified through a derived loop bound
  double worst_residual = 0.0;
  int basis_size = 0;
  std::string detail;
};

struct InvariantReport {
  std::string label;
  bool pass = false;
  double worst_exit_residual = 0.0;  // premise: exit states, g - f
  double worst_step_residual = 0.0;  // premise: guard states, g - qet[body]{g}
  std::string detail;
};

struct BoundValue {
  bool present = false;
  double at_default = 0.0;
  double min_over_suite = 0.0;
  double max_over_suite = 0.0;
  std::string detail;
};

struct CheckReport {
  bool pass = false;
  int suite_size = 0;
  std::uint64_t seed = 0;
  std::vector<SummaryReport> summaries;
  std::vector<InvariantReport> invariants;
  BoundValue bound;
};

// Map from label to node: @summary labels plus positional loopK labels.
struct LabelMap {
  std::map<std::string, const Stmt*> labels;
  std::vector<const Stmt*> loops;  // program-order While nodes
  const Stmt* find(const std::string& name) const;
};

LabelMap collect_labels(const Program& p);

// Checks the upper-invariant rule for one while loop against a state suite:
// on exit states f <= g, on guard states qet[body]{g} <= g, both within tol.
// Inner loops must be covered by entries in `summaries`; substitution is
// guarded by classicality of f and g and by a liveness check on variables the
// summarized statements assign without describing.
InvariantReport check_upper_invariant(const VarTable& vt, const Stmt* loop,
                                      const ExpPtr& f, const ExpPtr& g,
                                      const std::vector<MachineState>& suite,
                                      const SummaryTable& summaries,
                                      const CheckOptions& opt);

// Checks a summary claim for a loop-free statement: for every basis
// expectation kappa (constants plus indicators over the described variables),
// qet[stm]{kappa} equals cost + sum_i p_i kappa[update_i] on the suite
// (or is bounded by it when the summary is marked (le)).
SummaryReport check_summary(const VarTable& vt, const Stmt* stm, const Summary& sm,
                            const std::vector<MachineState>& suite,
                            const SummaryTable& validated, const CheckOptions& opt);

// Upper-bound claim for a statement containing exactly one uncovered loop:
// certified through the derived invariant g_kappa(t) = guard(t) ? cost +
// kappa(t[updates]) : kappa(t). Requires the (le) flag.
SummaryReport check_loop_summary(const VarTable& vt, const Stmt* stm, const Summary& sm,
                                 const std::vector<MachineState>& suite,
                                 const SummaryTable& validated, const CheckOptions& opt);

// Whole-program expected-cost bound: the program must be a loop-free prefix
// followed (optionally) by one while loop with a checked invariant g; the
// bound is the prefix transformer applied to g (or to the post-expectation
// when there is no tail loop), reported at the default initial state and over
// the suite.
BoundValue bound_whole_program(const VarTable& vt, const Program& p, const ExpPtr& post,
                               const std::optional<std::pair<const Stmt*, ExpPtr>>& tail_inv,
                               const std::vector<MachineState>& suite,
                               const SummaryTable& summaries, const CheckOptions& opt);

// Full pipeline for `qet check`: builds the suite, validates summaries bottom
// up (loop-free directly, single-loop claims through the derived-invariant
// route), checks the invariants, and composes the whole-program bound.
CheckReport run_check(const VarTable& vt, const Program& p, const SidecarFile& sc,
                      const CheckOptions& opt);

}  // namespace qet
