#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qet/errors.hpp"

namespace qet {

// Extended nonnegative reals. Plain doubles with +inf allowed; helpers keep
// the 0 * inf = 0 convention so probability-0 branches never poison a value.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double ext_scale(double r, double x) {
  if (r == 0.0) return 0.0;
  return r * x;
}

inline double ext_convex(double r, double a, double b) {
  return ext_scale(r, a) + ext_scale(1.0 - r, b);
}

// Convex sum of weighted values with total weight <= 1 + 1e-9; missing mass
// falls to bottom (0). Defined by the usual induction on the list but
// evaluated directly; permutation invariance is a tested property.
double convex_sum(const std::vector<std::pair<double, double>>& terms);

// Least upper bound of a monotone sequence of extended reals, detected by a
// tolerance on successive differences. Diverging sequences (value above
// `ceiling`) return +inf. Decreasing input raises Error{Internal}.
double kleene_sup(const std::vector<double>& chain, double tol = 1e-9,
                  double ceiling = 1e12);

// ---------------------------------------------------------------------------
// Cost structures over the extended reals. Each one fixes how a transition
// cost combines with a value; the expectation engines are templated on this.
// ---------------------------------------------------------------------------

// Expected cost: transition costs add up.
struct EcostStructure {
  using Value = double;
  static constexpr const char* name = "ecost";
  static Value bot() { return 0.0; }
  static Value convex(double r, Value a, Value b) { return ext_convex(r, a, b); }
  static Value combine(const std::vector<std::pair<double, Value>>& terms) {
    return convex_sum(terms);
  }
  static Value cost_add(double c, Value v) { return c + v; }
  static bool approx_eq(Value a, Value b, double tol) {
    if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b);
    return std::fabs(a - b) <= tol;
  }
  static bool leq(Value a, Value b, double tol) { return a <= b + tol; }
  static bool diverged(Value a, double ceiling) { return a > ceiling; }
};

// Expected value of the continuation: costs are forgotten.
struct ValueStructure {
  using Value = double;
  static constexpr const char* name = "value";
  static Value bot() { return 0.0; }
  static Value convex(double r, Value a, Value b) { return ext_convex(r, a, b); }
  static Value combine(const std::vector<std::pair<double, Value>>& terms) {
    return convex_sum(terms);
  }
  static Value cost_add(double, Value v) { return v; }
  static bool approx_eq(Value a, Value b, double tol) {
    return EcostStructure::approx_eq(a, b, tol);
  }
  static bool leq(Value a, Value b, double tol) { return a <= b + tol; }
  static bool diverged(Value a, double ceiling) { return a > ceiling; }
};

// Weakest-precondition flavour: values clamped to [0,1], costs forgotten.
struct WpStructure {
  using Value = double;
  static constexpr const char* name = "wp";
  static Value bot() { return 0.0; }
  static Value clamp(Value v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }
  static Value convex(double r, Value a, Value b) { return ext_convex(r, a, b); }
  static Value combine(const std::vector<std::pair<double, Value>>& terms) {
    return convex_sum(terms);
  }
  static Value cost_add(double, Value v) { return v; }
  static bool approx_eq(Value a, Value b, double tol) { return std::fabs(a - b) <= tol; }
  static bool leq(Value a, Value b, double tol) { return a <= b + tol; }
  static bool diverged(Value, double) { return false; }
};

}  // namespace qet
