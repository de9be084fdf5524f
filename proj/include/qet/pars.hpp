#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qet/expand.hpp"
#include "qet/state.hpp"

namespace qet {

// A running configuration: remaining work as a stack of statement frames
// (top = back), plus the machine state. An empty stack is a terminal
// configuration. Frames point into the expanded program tree, so merging can
// compare frames by pointer identity.
struct Config {
  std::vector<const Stmt*> frames;
  MachineState state;

  bool terminal() const { return frames.empty(); }
};

// Pushes a statement onto the frame stack, flattening sequences and summary
// wrappers (they change nothing in the forward semantics). One step of the
// machine then always executes exactly one basic rule, so step counts match
// the small-step relation one for one.
void push_frames(std::vector<const Stmt*>& frames, const Stmt* s);

Config initial_config(const Program& p, const VarTable& vt);
Config config_from_state(const Program& p, MachineState s);

struct StepBranch {
  double prob;
  Config cfg;
};

// One transition of a single running configuration: the step's cost and the
// resulting distribution (singleton except for measurements; measurement
// branches below 1e-12 are dropped). Stepping a terminal configuration is an
// error; Call/Prep nodes must have been expanded away.
struct StepResult {
  double cost = 0.0;
  std::vector<StepBranch> branches;
};

StepResult step(const VarTable& vt, const Config& cfg);

// A weighted configuration in a subdistribution.
struct WeightedConfig {
  double weight;
  Config cfg;
};

struct ExpansionReport {
  int steps = 0;
  double cost = 0.0;            // expected cost accumulated over the run
  double terminal_mass = 0.0;
  double running_mass = 0.0;
  double dropped_mass = 0.0;    // measurement pruning + branch-cap truncation
  bool truncated = false;       // branch cap was hit
  std::vector<WeightedConfig> terminals;
  std::vector<WeightedConfig> running;
};

// Runs `steps` lifted transitions from the given subdistribution. Terminal
// configurations persist; every running configuration advances once per step.
// Configurations with identical frames, stores, and amplitudes (within 1e-12)
// are merged, first-seen order preserved, so the expansion is deterministic.
// If the number of live branches would exceed `branch_cap`, the lightest
// running branches are dropped, reported in dropped_mass with truncated set;
// the accumulated cost remains a valid lower bound.
ExpansionReport expand(const VarTable& vt, std::vector<WeightedConfig> init,
                       int steps, std::int64_t branch_cap = 1000000);

// Finite-stage expected cost of a program from one configuration: the cost
// accumulated in `steps` transitions plus the terminal mass reached. Lower
// bound of the true expected cost, nondecreasing in `steps`.
struct ApproxResult {
  double lower_bound = 0.0;
  double terminal_mass = 0.0;
  bool truncated = false;
  double dropped_mass = 0.0;
};

ApproxResult ecost_approx(const VarTable& vt, const Config& cfg, int steps,
                          std::int64_t branch_cap = 1000000);

// Expected value of `f` over the stage-`steps` normal-form subdistribution.
ApproxResult expected_value_approx(const VarTable& vt, const Config& cfg, int steps,
                                   const std::function<double(const MachineState&)>& f,
                                   std::int64_t branch_cap = 1000000);

}  // namespace qet
