#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "qet/state.hpp"

namespace qet {

// Subnormalized density matrix: positive semidefinite within -1e-9 on the
// eigenvalues, trace <= 1 + 1e-9.
bool is_subdensity(const Eigen::MatrixXcd& a, double eig_tol = 1e-9,
                   double trace_tol = 1e-9);

// Loewner order a <= b: b - a positive semidefinite within eig_tol.
bool loewner_leq(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                 double eig_tol = 1e-9);

// Store-indexed family of subnormalized density matrices with finite support;
// absent keys mean the zero matrix. This is the value domain of the
// denotational reading: total trace <= 1, ordered pointwise by Loewner.
struct DensityMap {
  int dim = 0;  // matrix dimension (total quantum dimension)
  std::map<Store, Eigen::MatrixXcd> entries;

  double total_trace() const;
};

DensityMap density_zero(int dim);
DensityMap density_of_state(const MachineState& s);
DensityMap density_scale(double r, const DensityMap& a);
DensityMap density_add(const DensityMap& a, const DensityMap& b);
bool density_leq(const DensityMap& a, const DensityMap& b, double eig_tol = 1e-9);
bool density_approx_eq(const DensityMap& a, const DensityMap& b, double tol);
// Largest entrywise absolute difference over the union of supports.
double density_gap(const DensityMap& a, const DensityMap& b);

// Cost structure whose values are store-indexed density matrices; transition
// costs are forgotten (the denotational reading only tracks where the mass
// goes).
struct DenotStructure {
  using Value = DensityMap;
  int dim = 0;

  Value bot() const { return density_zero(dim); }
  Value convex(double r, const Value& a, const Value& b) const {
    return density_add(density_scale(r, a), density_scale(1.0 - r, b));
  }
  Value combine(const std::vector<std::pair<double, Value>>& terms) const {
    Value acc = bot();
    for (const auto& [w, v] : terms) acc = density_add(acc, density_scale(w, v));
    return acc;
  }
  Value cost_add(double, const Value& v) const { return v; }
  bool approx_eq(const Value& a, const Value& b, double tol) const {
    return density_approx_eq(a, b, tol);
  }
  bool leq(const Value& a, const Value& b, double tol) const {
    return density_leq(a, b, tol);
  }
  bool diverged(const Value&, double) const { return false; }
};

}  // namespace qet
