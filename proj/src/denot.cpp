#include "qet/denot.hpp"

#include <functional>

#include "qet/errors.hpp"

namespace qet {

namespace {

std::function<DensityMap(const MachineState&)> unit_cont() {
  return [](const MachineState& st) { return density_of_state(st); };
}

}  // namespace

WpResult<DenotStructure> wp_denotational(const VarTable& vt, const Program& p,
                                         const MachineState& init, const FixpointCfg& cfg) {
  if (vt.total_dim > 1024)
    fail(ErrorKind::Dimension,
         "denotational values need total quantum dimension at most 1024");
  DenotStructure alg;
  alg.dim = static_cast<int>(vt.total_dim);
  return wp_eval(vt, alg, p.body.get(), unit_cont(), init, cfg);
}

DenotReport strong_adequacy_check(const VarTable& vt, const Program& p,
                                  const MachineState& init, int steps, double slack,
                                  const FixpointCfg& cfg) {
  if (vt.total_dim > 1024)
    fail(ErrorKind::Dimension,
         "denotational values need total quantum dimension at most 1024");
  DenotReport rep;
  rep.steps = steps;

  ExpansionReport fwd = expand(vt, {WeightedConfig{1.0, config_from_state(p, init)}}, steps);
  DensityMap forward = density_zero(static_cast<int>(vt.total_dim));
  for (const auto& wc : fwd.terminals)
    forward = density_add(forward, density_scale(wc.weight, density_of_state(wc.cfg.state)));
  rep.terminal_mass = fwd.terminal_mass;
  rep.residual_mass = fwd.running_mass + fwd.dropped_mass;
  rep.forward_trace = forward.total_trace();

  DenotStructure alg;
  alg.dim = static_cast<int>(vt.total_dim);
  DensityMap staged = wp_step_indexed(vt, alg, config_from_state(p, init), steps, unit_cont());
  rep.backward_trace = staged.total_trace();
  rep.matched_gap = density_gap(forward, staged);

  WpResult<DenotStructure> limit = wp_denotational(vt, p, init, cfg);
  rep.limit_status = limit.status;
  rep.limit_gap = density_gap(forward, limit.value);

  rep.pass = rep.matched_gap <= rep.residual_mass + slack;
  return rep;
}

}  // namespace qet
