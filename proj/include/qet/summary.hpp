#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "qet/state.hpp"

namespace qet {

// A statement summary: fixed entry cost plus a distribution of classical
// updates, as written in sidecar files:
//   (summary fuse (cost 1) (outcome 1/4 ((x 1))) (outcome 3/4 ((x 0))))
// An optional (le) marks an upper bound claim instead of an equality.
struct SummaryUpdate {
  std::string var;
  std::int64_t value = 0;  // 0/1 for booleans
  mutable int bool_idx = -1;
  mutable int int_idx = -1;
};

struct SummaryOutcome {
  double prob = 0.0;
  std::vector<SummaryUpdate> updates;
};

struct Summary {
  std::string label;
  double cost = 0.0;
  bool upper_only = false;
  std::vector<SummaryOutcome> outcomes;
};

using SummaryTable = std::unordered_map<std::string, Summary>;

// Binds update variables to the layout; unknown names, bad boolean values, or
// outcome probabilities outside [0,1] (or summing above 1 + 1e-9) are errors.
void resolve_summary(const Summary& s, const VarTable& vt);

MachineState apply_summary_outcome(const MachineState& st, const SummaryOutcome& o);

// Variables a summary describes (those appearing in some outcome update).
std::vector<std::string> summary_described_vars(const Summary& s);

}  // namespace qet
