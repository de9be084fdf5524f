#include "qet/summary.hpp"

#include "qet/errors.hpp"

namespace qet {

void resolve_summary(const Summary& s, const VarTable& vt) {
  if (s.cost < 0) fail(ErrorKind::Type, "summary '" + s.label + "' has negative cost");
  double mass = 0.0;
  for (const auto& o : s.outcomes) {
    if (o.prob < 0.0 || o.prob > 1.0 + 1e-9)
      fail(ErrorKind::Type, "summary '" + s.label + "' has an outcome probability outside [0,1]");
    mass += o.prob;
    for (const auto& u : o.updates) {
      int b = vt.find_bool(u.var);
      int i = vt.find_int(u.var);
      if (b >= 0) {
        if (u.value != 0 && u.value != 1)
          fail(ErrorKind::Type,
               "summary '" + s.label + "' assigns " + std::to_string(u.value) + " to bool '" +
                   u.var + "'");
        u.bool_idx = b;
        u.int_idx = -1;
      } else if (i >= 0) {
        u.int_idx = i;
        u.bool_idx = -1;
      } else {
        fail(ErrorKind::Type,
             "summary '" + s.label + "' updates unknown variable '" + u.var + "'");
      }
    }
  }
  if (mass > 1.0 + 1e-9)
    fail(ErrorKind::Type, "summary '" + s.label + "' outcome probabilities exceed 1");
}

MachineState apply_summary_outcome(const MachineState& st, const SummaryOutcome& o) {
  MachineState t = st;
  for (const auto& u : o.updates) {
    if (u.bool_idx >= 0)
      t.store.bools[u.bool_idx] = u.value != 0 ? 1 : 0;
    else if (u.int_idx >= 0)
      t.store.ints[u.int_idx] = u.value;
    else
      fail(ErrorKind::Internal, "summary update not resolved");
  }
  return t;
}

std::vector<std::string> summary_described_vars(const Summary& s) {
  std::vector<std::string> out;
  for (const auto& o : s.outcomes)
    for (const auto& u : o.updates) {
      bool seen = false;
      for (const auto& v : out)
        if (v == u.var) seen = true;
      if (!seen) out.push_back(u.var);
    }
  return out;
}

}  // namespace qet
