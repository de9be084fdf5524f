#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qet/state.hpp"

namespace qet {

// Expectation expressions: maps from machine states to extended nonnegative
// reals. Written in s-expression syntax, e.g.
//   (mul (ind x) (add (const 1) (quadform (q) [[1,-1],[-1,1]])))
//
//   (const c)          constant, c a decimal or fraction, "inf" allowed
//   (ind b)            indicator of a boolean expression over the store
//   (arith a)          integer expression clamped below at 0
//   (add e1 e2 ...)    pointwise sum
//   (mul e1 e2 ...)    pointwise product
//   (scale c e)        constant times expression
//   (min e1 e2) (max e1 e2)
//   (quadform (regs...) [[...]])   <phi| (Q ⊗ I) |phi>, Q Hermitian PSD-checked
enum class EOp { Const, Ind, Arith, Add, Mul, Scale, Min, Max, QuadForm };

struct ExpectationExpr;
using ExpPtr = std::shared_ptr<const ExpectationExpr>;

struct ExpectationExpr {
  EOp op;
  double cval = 0.0;                // Const, Scale factor
  BExpPtr cond;                     // Ind
  AExpPtr arith;                    // Arith
  std::vector<ExpPtr> args;         // Add/Mul/Scale/Min/Max
  std::vector<std::string> regs;    // QuadForm registers
  Matrix q;                         // QuadForm matrix
  int line = 0, col = 0;
  mutable std::vector<int> resolved_regs;
  mutable std::vector<int> resolved_dims;
  mutable std::vector<std::int64_t> resolved_strides;
};

ExpPtr exp_const(double c);
ExpPtr exp_ind(BExpPtr b);
ExpPtr exp_arith(AExpPtr a);
ExpPtr exp_nary(EOp op, std::vector<ExpPtr> args);
ExpPtr exp_scale(double c, ExpPtr e);
ExpPtr exp_quadform(std::vector<std::string> regs, Matrix q);

// Parses one expectation expression; trailing garbage is an error.
ExpPtr parse_expectation(const std::string& text);
struct SNode;
ExpPtr parse_expectation_node(const SNode& n);
std::string print_expectation(const ExpectationExpr& e);

// Resolves variable/register names against a layout; type errors and
// non-Hermitian or non-PSD quadform matrices (within 1e-9) are reported here.
void resolve_expectation(const ExpectationExpr& e, const VarTable& vt);

// Evaluates a resolved expression. Results are clamped below at 0.
double eval_expectation(const ExpectationExpr& e, const MachineState& s);

// True when the expression never looks at amplitudes (no quadform), i.e. it
// factors through the classical store.
bool classical_check(const ExpectationExpr& e);

// Classical variables an expectation reads.
void expectation_vars(const ExpectationExpr& e, std::vector<std::string>& bools,
                      std::vector<std::string>& ints);

// Quantum registers an expectation observes.
std::vector<int> expectation_regs(const ExpectationExpr& e, const VarTable& vt);

// --- state suites -----------------------------------------------------------

// Deterministic, seeded suite of machine states: the all-zero initial state,
// every computational basis state when the total dimension is at most 8,
// sweeps of each int variable over [-2, 8], then `random_count` states with
// uniform random stores (ints in [-8, 8]) and Haar-random amplitudes.
std::vector<MachineState> make_suite(const VarTable& vt, int random_count,
                                     std::uint64_t seed);

// Deterministic RNG used across the project (splitmix64-seeded xoshiro-style
// generator with hand-rolled uniform/normal draws so results do not depend on
// the standard library's distribution implementations).
struct Rng {
  std::uint64_t s[4];
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double next_unit();                    // [0, 1)
  double next_normal();                  // standard normal
  std::int64_t next_int(std::int64_t lo, std::int64_t hi);  // inclusive
};

AmpsPtr haar_random_amps(std::int64_t dim, Rng& rng);

}  // namespace qet
