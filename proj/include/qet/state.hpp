#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "qet/expand.hpp"
#include "qet/syntax.hpp"

namespace qet {

// Classical store: flat vectors indexed per VarTable. Booleans are 0/1.
struct Store {
  std::vector<std::uint8_t> bools;
  std::vector<std::int64_t> ints;

  bool operator==(const Store& o) const { return bools == o.bools && ints == o.ints; }
  bool operator<(const Store& o) const {
    if (bools != o.bools) return bools < o.bools;
    return ints < o.ints;
  }
};

// Immutable amplitude vector over the full register product, with a content
// signature (over 1e-12-quantized amplitudes) cached at construction so state
// merging does not rehash large vectors every step.
struct Amps {
  std::vector<cplx> v;
  std::uint64_t sig = 0;

  explicit Amps(std::vector<cplx> a);
};

using AmpsPtr = std::shared_ptr<const Amps>;

AmpsPtr make_amps(std::vector<cplx> a);

struct MachineState {
  Store store;
  AmpsPtr amps;
};

// |0...0> amplitudes with all-false/all-zero store.
MachineState initial_state(const VarTable& vt);

std::uint64_t store_hash(const Store& s);

// Exact equality on stores, 1e-12 quantized equality on amplitudes.
bool states_equivalent(const MachineState& a, const MachineState& b);
std::uint64_t state_sig(const MachineState& s);

// --- classical evaluation -------------------------------------------------

// int64 arithmetic; overflow raises Error{Overflow}.
std::int64_t eval_aexp(const AExp& e, const Store& s);
bool eval_bexp(const BExp& e, const Store& s);

// --- quantum operations ---------------------------------------------------

// Builds the concrete matrix of a builtin gate for the given target
// dimensions (H/X/T: one 2-dim register; CNOT/CZ: two 2-dim registers;
// SHIFT: direction register of dim 2 plus a position register of any dim,
// |0,i> -> |0,i-1 mod n| and |1,i> -> |1,i+1 mod n|).
Matrix builtin_matrix(GateKind kind, const std::vector<int>& dims);

bool is_unitary(const Matrix& m, double tol = 1e-9);

// Applies `m` to the listed registers (most significant digit = first listed
// register). Dimension mismatches raise Error{Dimension}.
AmpsPtr apply_unitary(const VarTable& vt, const AmpsPtr& amps,
                      const std::vector<int>& regs, const Matrix& m);

// One measurement branch: outcome value, its probability, post state.
struct MeasBranch {
  int outcome;
  double prob;
  AmpsPtr post;
};

// Projective measurement of one register in the computational basis.
// `zero_vs_rest` collapses outcomes to {0 observed, anything else}; plain
// measurement requires a 2-dimensional register. Branches with probability
// below 1e-12 are dropped; surviving branch states are renormalized.
std::vector<MeasBranch> measure(const VarTable& vt, const AmpsPtr& amps, int reg,
                                bool zero_vs_rest);

// Weighted projector expectation <phi| (Q on regs ⊗ I) |phi>, used by
// quadratic-form observables. Q is Hermitian-symmetrized before use.
double quad_form_value(const VarTable& vt, const AmpsPtr& amps,
                       const std::vector<int>& regs, const Matrix& q);

// Same, with the register layout already resolved to dims and strides.
double quad_form_value_spans(const AmpsPtr& amps, const std::vector<int>& dims,
                             const std::vector<std::int64_t>& strides, const Matrix& q);

// Concrete matrix for an Apply statement (builtin instantiated against the
// resolved target dimensions, or the literal).
Matrix stmt_gate_matrix(const VarTable& vt, const Stmt& s);

}  // namespace qet
