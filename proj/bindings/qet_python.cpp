// Python module wrapping the main library operations. Structured results come
// back as JSON strings so the Python side stays dependency-free.

#include <pybind11/pybind11.h>

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "qet/check.hpp"
#include "qet/denot.hpp"
#include "qet/expand.hpp"
#include "qet/pars.hpp"
#include "qet/wp.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace qet;

namespace {

MachineState parse_init(const VarTable& vt, const std::string& text) {
  MachineState st = initial_state(vt);
  if (text.empty()) return st;
  json j = json::parse(text);
  if (j.contains("store")) {
    for (auto& [k, v] : j["store"].items()) {
      int bi = vt.find_bool(k);
      int ii = vt.find_int(k);
      if (bi >= 0) {
        st.store.bools[bi] = (v.is_boolean() ? v.get<bool>() : v.get<std::int64_t>() != 0) ? 1 : 0;
      } else if (ii >= 0) {
        st.store.ints[ii] = v.get<std::int64_t>();
      } else {
        fail(ErrorKind::Usage, "init store names unknown variable '" + k + "'");
      }
    }
  }
  if (j.contains("amps")) {
    const auto& arr = j["amps"];
    if (static_cast<std::int64_t>(arr.size()) != vt.total_dim)
      fail(ErrorKind::Usage, "init amps length does not match the total dimension");
    std::vector<cplx> v;
    v.reserve(arr.size());
    double norm = 0.0;
    for (const auto& pair : arr) {
      double re = pair.at(0).get<double>();
      double im = pair.at(1).get<double>();
      v.emplace_back(re, im);
      norm += re * re + im * im;
    }
    if (std::fabs(norm - 1.0) > 1e-9)
      fail(ErrorKind::Usage, "init amps must have unit norm");
    st.amps = make_amps(std::move(v));
  }
  return st;
}

json store_json(const VarTable& vt, const Store& s) {
  json j = json::object();
  for (std::size_t i = 0; i < vt.bools.size(); ++i) j[vt.bools[i]] = s.bools[i] != 0;
  for (std::size_t i = 0; i < vt.ints.size(); ++i) j[vt.ints[i]] = s.ints[i];
  return j;
}

std::string parse_pretty(const std::string& text) {
  VarTable vt;
  Program p = load_program(text, vt);
  return print_program(p);
}

std::string layout(const std::string& text) {
  VarTable vt;
  load_program(text, vt);
  json j{{"bools", vt.bools},
         {"ints", vt.ints},
         {"regs", vt.regs},
         {"dims", vt.dims},
         {"total_dim", vt.total_dim}};
  return j.dump();
}

std::string run(const std::string& text, int steps, const std::string& init,
                std::int64_t branch_cap) {
  VarTable vt;
  Program p = load_program(text, vt);
  MachineState st = parse_init(vt, init);
  ExpansionReport rep = expand(vt, {WeightedConfig{1.0, config_from_state(p, st)}}, steps,
                               branch_cap);
  json j{{"steps", rep.steps},
         {"expected_cost", rep.cost},
         {"terminal_mass", rep.terminal_mass},
         {"running_mass", rep.running_mass},
         {"dropped_mass", rep.dropped_mass},
         {"truncated", rep.truncated}};
  j["terminals"] = json::array();
  for (const auto& wc : rep.terminals)
    j["terminals"].push_back({{"weight", wc.weight}, {"store", store_json(vt, wc.cfg.state.store)}});
  return j.dump();
}

std::string wp(const std::string& text, const std::string& cost, const std::string& cont,
               const std::string& init, int max_iter) {
  VarTable vt;
  Program p = load_program(text, vt);
  MachineState st = parse_init(vt, init);
  FixpointCfg fix;
  fix.max_iter = max_iter;

  if (cost == "denot") {
    WpResult<DenotStructure> r = wp_denotational(vt, p, st, fix);
    json stores = json::array();
    for (const auto& [store, m] : r.value.entries)
      stores.push_back({{"store", store_json(vt, store)}, {"trace", m.trace().real()}});
    json j{{"trace", r.value.total_trace()},
           {"status", wp_status_name(r.status)},
           {"stores", stores}};
    return j.dump();
  }

  ExpPtr keep = cont.empty() ? exp_const(0.0) : parse_expectation(cont);
  resolve_expectation(*keep, vt);
  ExpPtr e = keep;
  std::function<double(const MachineState&)> f = [e](const MachineState& s) {
    return eval_expectation(*e, s);
  };
  double value = 0.0;
  WpStatus status = WpStatus::Exact;
  long iters = 0;
  if (cost == "ecost") {
    auto r = wp_eval(vt, EcostStructure{}, p.body.get(), f, st, fix);
    value = r.value, status = r.status, iters = r.loop_iterations;
  } else if (cost == "value") {
    auto r = wp_eval(vt, ValueStructure{}, p.body.get(), f, st, fix);
    value = r.value, status = r.status, iters = r.loop_iterations;
  } else if (cost == "wp") {
    std::function<double(const MachineState&)> g = [&f](const MachineState& s) {
      return std::min(f(s), 1.0);
    };
    auto r = wp_eval(vt, WpStructure{}, p.body.get(), g, st, fix);
    value = r.value, status = r.status, iters = r.loop_iterations;
  } else {
    fail(ErrorKind::Usage, "unknown cost structure '" + cost + "'");
  }
  json j{{"value", value}, {"status", wp_status_name(status)}, {"iterations", iters}};
  return j.dump();
}

std::string check(const std::string& text, const std::string& sidecar, std::uint64_t seed,
                  int random_states) {
  VarTable vt;
  Program p = load_program(text, vt);
  SidecarFile sc = parse_sidecar(sidecar);
  CheckOptions opt;
  opt.seed = seed;
  opt.random_states = random_states;
  CheckReport rep = run_check(vt, p, sc, opt);

  json j{{"pass", rep.pass}, {"suite_size", rep.suite_size}, {"seed", rep.seed}};
  j["summaries"] = json::array();
  for (const auto& s : rep.summaries)
    j["summaries"].push_back({{"label", s.label},
                              {"pass", s.pass},
                              {"conditional", s.conditional},
                              {"worst_residual", s.worst_residual},
                              {"basis_size", s.basis_size},
                              {"detail", s.detail}});
  j["invariants"] = json::array();
  for (const auto& i : rep.invariants)
    j["invariants"].push_back({{"label", i.label},
                               {"pass", i.pass},
                               {"worst_exit_residual", i.worst_exit_residual},
                               {"worst_step_residual", i.worst_step_residual},
                               {"detail", i.detail}});
  j["bound"] = {{"present", rep.bound.present},
                {"at_default", rep.bound.at_default},
                {"min_over_suite", rep.bound.min_over_suite},
                {"max_over_suite", rep.bound.max_over_suite},
                {"detail", rep.bound.detail}};
  return j.dump();
}

std::string adequacy(const std::string& text, int steps, double slack, const std::string& init) {
  VarTable vt;
  Program p = load_program(text, vt);
  MachineState st = parse_init(vt, init);
  DenotReport rep = strong_adequacy_check(vt, p, st, steps, slack, FixpointCfg{});
  json j{{"steps", rep.steps},
         {"terminal_mass", rep.terminal_mass},
         {"residual_mass", rep.residual_mass},
         {"matched_gap", rep.matched_gap},
         {"limit_gap", rep.limit_gap},
         {"forward_trace", rep.forward_trace},
         {"backward_trace", rep.backward_trace},
         {"limit_status", wp_status_name(rep.limit_status)},
         {"pass", rep.pass}};
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(pyqet, m) {
  m.doc() = "expected-cost analysis for classical-quantum while programs";
  m.def("parse", &parse_pretty, py::arg("text"),
        "parse, expand and pretty-print a program");
  m.def("layout", &layout, py::arg("text"),
        "variable and register layout as a JSON string");
  m.def("run", &run, py::arg("text"), py::arg("steps"), py::arg("init") = "",
        py::arg("branch_cap") = 1000000,
        "expand the forward semantics for n steps; JSON report");
  m.def("wp", &wp, py::arg("text"), py::arg("cost") = "ecost", py::arg("cont") = "",
        py::arg("init") = "", py::arg("max_iter") = 10000,
        "backward expectation transformer at one state; JSON report");
  m.def("check", &check, py::arg("text"), py::arg("sidecar"), py::arg("seed") = 1,
        py::arg("random_states") = 200,
        "check invariants and summaries from sidecar text; JSON report");
  m.def("adequacy", &adequacy, py::arg("text"), py::arg("steps"), py::arg("slack") = 1e-6,
        py::arg("init") = "",
        "compare forward expansion against the staged transformer; JSON report");
}
