#include "qet/cost.hpp"

#include <cmath>

namespace qet {

double convex_sum(const std::vector<std::pair<double, double>>& terms) {
  double mass = 0.0;
  double acc = 0.0;
  for (const auto& [w, v] : terms) {
    if (w < -1e-12) fail(ErrorKind::Internal, "negative weight in convex sum");
    mass += w;
    acc += ext_scale(w, v);
  }
  if (mass > 1.0 + 1e-9) fail(ErrorKind::Internal, "convex sum weights exceed 1");
  return acc;
}

double kleene_sup(const std::vector<double>& chain, double tol, double ceiling) {
  double cur = 0.0;
  bool first = true;
  for (double v : chain) {
    if (!first && v < cur - 1e-7)
      fail(ErrorKind::Internal, "kleene_sup applied to a non-monotone sequence");
    if (!first && std::fabs(v - cur) <= tol) return v;
    if (v > ceiling) return kInf;
    cur = v;
    first = false;
  }
  return cur;
}

}  // namespace qet
