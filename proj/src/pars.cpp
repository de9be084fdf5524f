#include "qet/pars.hpp"

#include <algorithm>
#include <unordered_map>

#include "qet/errors.hpp"

namespace qet {

void push_frames(std::vector<const Stmt*>& frames, const Stmt* s) {
  switch (s->op) {
    case SOp::Seq:
      push_frames(frames, s->s2.get());
      push_frames(frames, s->s1.get());
      break;
    case SOp::Summarized:
      push_frames(frames, s->s1.get());
      break;
    default:
      frames.push_back(s);
  }
}

Config initial_config(const Program& p, const VarTable& vt) {
  return config_from_state(p, initial_state(vt));
}

Config config_from_state(const Program& p, MachineState s) {
  Config c;
  c.state = std::move(s);
  // push_frames leaves the next statement at the back of the stack
  if (p.body) push_frames(c.frames, p.body.get());
  return c;
}

namespace {

// gate matrices resolved per statement, shared across the whole expansion
struct GateCache {
  const VarTable& vt;
  std::unordered_map<const Stmt*, Matrix> cache;

  const Matrix& get(const Stmt* s) {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    return cache.emplace(s, stmt_gate_matrix(vt, *s)).first->second;
  }
};

StepResult step_impl(const VarTable& vt, const Config& cfg, GateCache* gates) {
  if (cfg.terminal()) fail(ErrorKind::Internal, "step applied to a terminal configuration");
  const Stmt* s = cfg.frames.back();
  StepResult out;

  auto rest = [&]() {
    std::vector<const Stmt*> f(cfg.frames.begin(), cfg.frames.end() - 1);
    return f;
  };
  auto single = [&](Config c) {
    out.branches.push_back(StepBranch{1.0, std::move(c)});
  };

  switch (s->op) {
    case SOp::Skip:
      single(Config{rest(), cfg.state});
      break;
    case SOp::AssignBool: {
      MachineState t = cfg.state;
      t.store.bools[s->resolved_var] = eval_bexp(*s->bexp, cfg.state.store) ? 1 : 0;
      single(Config{rest(), std::move(t)});
      break;
    }
    case SOp::AssignInt: {
      MachineState t = cfg.state;
      t.store.ints[s->resolved_var] = eval_aexp(*s->aexp, cfg.state.store);
      single(Config{rest(), std::move(t)});
      break;
    }
    case SOp::Apply: {
      MachineState t = cfg.state;
      Matrix local;
      const Matrix* m;
      if (gates) {
        m = &gates->get(s);
      } else {
        local = stmt_gate_matrix(vt, *s);
        m = &local;
      }
      t.amps = apply_unitary(vt, cfg.state.amps, s->resolved_regs, *m);
      single(Config{rest(), std::move(t)});
      break;
    }
    case SOp::Measure:
    case SOp::MeasureZero: {
      auto branches = measure(vt, cfg.state.amps, s->resolved_reg, s->op == SOp::MeasureZero);
      auto f = rest();
      for (const auto& br : branches) {
        MachineState t;
        t.store = cfg.state.store;
        t.store.bools[s->resolved_var] = br.outcome != 0 ? 1 : 0;
        t.amps = br.post;
        out.branches.push_back(StepBranch{br.prob, Config{f, std::move(t)}});
      }
      break;
    }
    case SOp::Consume: {
      out.cost = std::max(static_cast<double>(eval_aexp(*s->aexp, cfg.state.store)), 0.0);
      single(Config{rest(), cfg.state});
      break;
    }
    case SOp::If: {
      auto f = rest();
      push_frames(f, eval_bexp(*s->bexp, cfg.state.store) ? s->s1.get() : s->s2.get());
      single(Config{std::move(f), cfg.state});
      break;
    }
    case SOp::While: {
      auto f = rest();
      if (eval_bexp(*s->bexp, cfg.state.store)) {
        f.push_back(s);  // loop continues after the body
        push_frames(f, s->s1.get());
      }
      single(Config{std::move(f), cfg.state});
      break;
    }
    case SOp::Seq:
    case SOp::Summarized:
      fail(ErrorKind::Internal, "composite statement on the frame stack");
    case SOp::Call:
    case SOp::PrepZero:
    case SOp::PrepPlus:
      fail(ErrorKind::Internal, "machine ran into an unexpanded macro");
  }
  return out;
}

std::uint64_t config_sig(const Config& c) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  for (const Stmt* s : c.frames) mix(reinterpret_cast<std::uintptr_t>(s));
  mix(state_sig(c.state));
  return h;
}

bool config_equiv(const Config& a, const Config& b) {
  return a.frames == b.frames && states_equivalent(a.state, b.state);
}

}  // namespace

StepResult step(const VarTable& vt, const Config& cfg) { return step_impl(vt, cfg, nullptr); }

ExpansionReport expand(const VarTable& vt, std::vector<WeightedConfig> init, int steps,
                       std::int64_t branch_cap) {
  ExpansionReport rep;
  GateCache gates{vt, {}};

  std::vector<WeightedConfig> terminals;
  std::vector<WeightedConfig> running;
  for (auto& wc : init) {
    if (wc.cfg.terminal())
      terminals.push_back(std::move(wc));
    else
      running.push_back(std::move(wc));
  }

  auto merge = [](std::vector<WeightedConfig>& v) {
    std::vector<WeightedConfig> out;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
    for (auto& wc : v) {
      std::uint64_t sig = config_sig(wc.cfg);
      auto& cands = index[sig];
      bool found = false;
      for (std::size_t i : cands) {
        if (config_equiv(out[i].cfg, wc.cfg)) {
          out[i].weight += wc.weight;
          found = true;
          break;
        }
      }
      if (!found) {
        cands.push_back(out.size());
        out.push_back(std::move(wc));
      }
    }
    v = std::move(out);
  };

  merge(terminals);
  merge(running);

  for (int n = 0; n < steps && !running.empty(); ++n) {
    std::vector<WeightedConfig> next;
    next.reserve(running.size() * 2);
    for (const auto& wc : running) {
      StepResult sr = step_impl(vt, wc.cfg, &gates);
      rep.cost += wc.weight * sr.cost;
      double child_mass = 0.0;
      for (auto& br : sr.branches) {
        child_mass += br.prob;
        if (br.cfg.terminal())
          terminals.push_back(WeightedConfig{wc.weight * br.prob, std::move(br.cfg)});
        else
          next.push_back(WeightedConfig{wc.weight * br.prob, std::move(br.cfg)});
      }
      double deficit = wc.weight * (1.0 - child_mass);
      if (deficit > 1e-13) rep.dropped_mass += deficit;
    }
    merge(next);
    if (static_cast<std::int64_t>(next.size()) > branch_cap) {
      // drop the lightest running branches; the result stays a lower bound
      std::vector<std::size_t> order(next.size());
      for (std::size_t i = 0; i < next.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return next[a].weight > next[b].weight;
      });
      std::vector<WeightedConfig> kept;
      kept.reserve(static_cast<std::size_t>(branch_cap));
      std::vector<std::size_t> keep_idx(order.begin(), order.begin() + branch_cap);
      std::sort(keep_idx.begin(), keep_idx.end());
      for (std::size_t i : keep_idx) kept.push_back(std::move(next[i]));
      for (std::size_t k = branch_cap; k < order.size(); ++k)
        rep.dropped_mass += next[order[k]].weight;
      rep.truncated = true;
      next = std::move(kept);
    }
    running = std::move(next);
    ++rep.steps;
    if (rep.steps < steps) merge(terminals);
  }
  merge(terminals);

  for (const auto& wc : terminals) rep.terminal_mass += wc.weight;
  for (const auto& wc : running) rep.running_mass += wc.weight;
  rep.terminals = std::move(terminals);
  rep.running = std::move(running);
  return rep;
}

ApproxResult ecost_approx(const VarTable& vt, const Config& cfg, int steps,
                          std::int64_t branch_cap) {
  ExpansionReport rep = expand(vt, {WeightedConfig{1.0, cfg}}, steps, branch_cap);
  return ApproxResult{rep.cost, rep.terminal_mass, rep.truncated, rep.dropped_mass};
}

ApproxResult expected_value_approx(const VarTable& vt, const Config& cfg, int steps,
                                   const std::function<double(const MachineState&)>& f,
                                   std::int64_t branch_cap) {
  ExpansionReport rep = expand(vt, {WeightedConfig{1.0, cfg}}, steps, branch_cap);
  double acc = 0.0;
  for (const auto& wc : rep.terminals) acc += wc.weight * f(wc.cfg.state);
  return ApproxResult{acc, rep.terminal_mass, rep.truncated, rep.dropped_mass};
}

}  // namespace qet
