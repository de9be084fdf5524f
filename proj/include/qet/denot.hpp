#pragma once

#include "qet/density.hpp"
#include "qet/pars.hpp"
#include "qet/wp.hpp"

namespace qet {

// Backward denotational value: the expectation transformer over store-indexed
// density matrices with continuation h(s, phi) = [s -> |phi><phi|]. Requires
// total quantum dimension at most 2^10.
WpResult<DenotStructure> wp_denotational(const VarTable& vt, const Program& p,
                                         const MachineState& init, const FixpointCfg& cfg);

struct DenotReport {
  int steps = 0;
  double terminal_mass = 0.0;
  double residual_mass = 0.0;
  double matched_gap = 0.0;    // forward stage-n image vs stage-n backward value
  double limit_gap = 0.0;      // forward stage-n image vs converged backward value
  double forward_trace = 0.0;
  double backward_trace = 0.0;
  WpStatus limit_status = WpStatus::Exact;
  bool pass = false;           // matched_gap <= residual_mass + slack
};

// Strong-adequacy comparison at matched depth: runs n forward steps, pushes
// the terminal subdistribution through h, and compares entrywise against the
// stage-n backward value (and against the converged value for reference).
DenotReport strong_adequacy_check(const VarTable& vt, const Program& p,
                                  const MachineState& init, int steps, double slack,
                                  const FixpointCfg& cfg);

}  // namespace qet
