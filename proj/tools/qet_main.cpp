#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qet/check.hpp"
#include "qet/denot.hpp"
#include "qet/expand.hpp"
#include "qet/parser.hpp"
#include "qet/pars.hpp"
#include "qet/wp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qet;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Usage, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Usage, "cannot write '" + path + "'");
  out << body;
}

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
      fail(ErrorKind::Usage, "init amps length " + std::to_string(arr.size()) +
                                 " does not match total dimension " +
                                 std::to_string(vt.total_dim));
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
      fail(ErrorKind::Usage, "init amps must have unit norm (got " + std::to_string(norm) + ")");
    st.amps = make_amps(std::move(v));
  }
  return st;
}

std::string store_str(const VarTable& vt, const Store& s) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (std::size_t i = 0; i < vt.bools.size(); ++i) {
    os << (first ? "" : ", ") << vt.bools[i] << "=" << (s.bools[i] ? "true" : "false");
    first = false;
  }
  for (std::size_t i = 0; i < vt.ints.size(); ++i) {
    os << (first ? "" : ", ") << vt.ints[i] << "=" << s.ints[i];
    first = false;
  }
  os << "}";
  return os.str();
}

json check_report_json(const CheckReport& rep) {
  json j;
  j["pass"] = rep.pass;
  j["suite_size"] = rep.suite_size;
  j["seed"] = rep.seed;
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
  return j;
}

void print_check_report(const CheckReport& rep) {
  for (const auto& s : rep.summaries)
    std::cout << "summary " << s.label << ": " << (s.pass ? "PASS" : "FAIL")
              << (s.conditional ? " (conditional)" : "") << " — " << s.detail << "\n";
  for (const auto& i : rep.invariants)
    std::cout << "invariant " << i.label << ": " << (i.pass ? "PASS" : "FAIL") << " — "
              << i.detail << "\n";
  if (rep.bound.present)
    std::cout << "bound " << rep.bound.at_default << " at the default initial state (suite min "
              << rep.bound.min_over_suite << ", max " << rep.bound.max_over_suite << ")\n";
  else
    std::cout << "bound: unavailable — " << rep.bound.detail << "\n";
  std::cout << "check: " << (rep.pass ? "PASS" : "FAIL") << "\n";
}

struct CommonOpts {
  std::string init_json;
  std::string json_path;
  int max_iter = 10000;
  double tol = 1e-9;
};

FixpointCfg fix_of(const CommonOpts& c) {
  FixpointCfg f;
  f.max_iter = c.max_iter;
  f.tol = c.tol;
  return f;
}

void maybe_write_json(const std::string& path, const json& j) {
  if (!path.empty()) spit(path, j.dump(2) + "\n");
}

int cmd_parse(const std::string& file, const std::string& json_path) {
  VarTable vt;
  Program p = load_program(slurp(file), vt);
  std::cout << print_program(p);
  if (!json_path.empty()) {
    json j;
    j["bools"] = vt.bools;
    j["ints"] = vt.ints;
    j["regs"] = vt.regs;
    j["dims"] = vt.dims;
    j["total_dim"] = vt.total_dim;
    maybe_write_json(json_path, j);
  }
  return 0;
}

int cmd_run(const std::string& file, int steps, std::int64_t branch_cap,
            const CommonOpts& copt) {
  VarTable vt;
  Program p = load_program(slurp(file), vt);
  MachineState init = parse_init(vt, copt.init_json);
  ExpansionReport rep = expand(vt, {WeightedConfig{1.0, config_from_state(p, init)}}, steps,
                               branch_cap);
  std::cout << "steps " << rep.steps << "\n";
  std::cout << "expected-cost " << rep.cost << "\n";
  std::cout << "terminal-mass " << rep.terminal_mass << "\n";
  std::cout << "running-mass " << rep.running_mass << "\n";
  std::cout << "dropped-mass " << rep.dropped_mass << "\n";
  std::cout << "truncated " << (rep.truncated ? "true" : "false") << "\n";
  json j{{"steps", rep.steps},
         {"expected_cost", rep.cost},
         {"terminal_mass", rep.terminal_mass},
         {"running_mass", rep.running_mass},
         {"dropped_mass", rep.dropped_mass},
         {"truncated", rep.truncated}};
  j["terminals"] = json::array();
  for (const auto& wc : rep.terminals)
    j["terminals"].push_back({{"weight", wc.weight}, {"store", store_str(vt, wc.cfg.state.store)}});
  maybe_write_json(copt.json_path, j);
  return 0;
}

std::function<double(const MachineState&)> load_cont(const std::string& cont, const VarTable& vt,
                                                     ExpPtr& keep) {
  if (cont.empty() || cont == "zero") {
    keep = exp_const(0.0);
  } else {
    keep = parse_expectation(slurp(cont));
  }
  resolve_expectation(*keep, vt);
  ExpPtr e = keep;
  return [e](const MachineState& s) { return eval_expectation(*e, s); };
}

int cmd_wp(const std::string& file, const std::string& cost, const std::string& cont,
           const CommonOpts& copt) {
  VarTable vt;
  Program p = load_program(slurp(file), vt);
  MachineState init = parse_init(vt, copt.init_json);
  FixpointCfg fix = fix_of(copt);

  if (cost == "denot") {
    WpResult<DenotStructure> r = wp_denotational(vt, p, init, fix);
    std::cout << "trace " << r.value.total_trace() << "\n";
    std::cout << "status " << wp_status_name(r.status) << "\n";
    std::cout << "stores " << r.value.entries.size() << "\n";
    for (const auto& [st, m] : r.value.entries)
      std::cout << "  " << store_str(vt, st) << " trace " << m.trace().real() << "\n";
    json j{{"trace", r.value.total_trace()},
           {"status", wp_status_name(r.status)},
           {"stores", r.value.entries.size()}};
    maybe_write_json(copt.json_path, j);
    return 0;
  }

  ExpPtr keep;
  auto f = load_cont(cont, vt, keep);
  double value = 0.0;
  WpStatus status = WpStatus::Exact;
  long iters = 0;
  if (cost == "ecost") {
    auto r = wp_eval(vt, EcostStructure{}, p.body.get(), f, init, fix);
    value = r.value, status = r.status, iters = r.loop_iterations;
  } else if (cost == "value") {
    auto r = wp_eval(vt, ValueStructure{}, p.body.get(), f, init, fix);
    value = r.value, status = r.status, iters = r.loop_iterations;
  } else if (cost == "wp") {
    auto g = [&f](const MachineState& s) { return std::min(f(s), 1.0); };
    auto r = wp_eval(vt, WpStructure{}, p.body.get(),
                     std::function<double(const MachineState&)>(g), init, fix);
    value = r.value, status = r.status, iters = r.loop_iterations;
  } else {
    fail(ErrorKind::Usage, "unknown cost structure '" + cost + "'");
  }
  std::cout << "value " << value << "\n";
  std::cout << "status " << wp_status_name(status) << "\n";
  std::cout << "iterations " << iters << "\n";
  json j{{"value", value}, {"status", wp_status_name(status)}, {"iterations", iters}};
  maybe_write_json(copt.json_path, j);
  return 0;
}

int cmd_check(const std::string& file, std::string inv_path, std::uint64_t seed,
              int random_states, const CommonOpts& copt) {
  VarTable vt;
  Program p = load_program(slurp(file), vt);
  if (inv_path.empty()) {
    fs::path side = fs::path(file).replace_extension(".inv");
    if (!fs::exists(side))
      fail(ErrorKind::Usage, "no sidecar found; pass --invariant FILE");
    inv_path = side.string();
  }
  SidecarFile sc = parse_sidecar(slurp(inv_path));
  CheckOptions opt;
  opt.seed = seed;
  opt.random_states = random_states;
  opt.tol = copt.tol;
  opt.fix = fix_of(copt);
  CheckReport rep = run_check(vt, p, sc, opt);
  print_check_report(rep);
  maybe_write_json(copt.json_path, check_report_json(rep));
  return rep.pass ? 0 : 1;
}

int cmd_adequacy(const std::string& file, int steps, double slack, const CommonOpts& copt) {
  VarTable vt;
  Program p = load_program(slurp(file), vt);
  MachineState init = parse_init(vt, copt.init_json);
  DenotReport rep = strong_adequacy_check(vt, p, init, steps, slack, fix_of(copt));
  std::cout << "steps " << rep.steps << "\n";
  std::cout << "terminal-mass " << rep.terminal_mass << "\n";
  std::cout << "residual-mass " << rep.residual_mass << "\n";
  std::cout << "matched-gap " << rep.matched_gap << "\n";
  std::cout << "limit-gap " << rep.limit_gap << "\n";
  std::cout << "forward-trace " << rep.forward_trace << "\n";
  std::cout << "backward-trace " << rep.backward_trace << "\n";
  std::cout << "limit-status " << wp_status_name(rep.limit_status) << "\n";
  std::cout << "adequacy: " << (rep.pass ? "PASS" : "FAIL") << "\n";
  json j{{"steps", rep.steps},
         {"terminal_mass", rep.terminal_mass},
         {"residual_mass", rep.residual_mass},
         {"matched_gap", rep.matched_gap},
         {"limit_gap", rep.limit_gap},
         {"forward_trace", rep.forward_trace},
         {"backward_trace", rep.backward_trace},
         {"limit_status", wp_status_name(rep.limit_status)},
         {"pass", rep.pass}};
  maybe_write_json(copt.json_path, j);
  return rep.pass ? 0 : 1;
}

int cmd_corpus(const std::string& dir, std::uint64_t seed, int random_states,
               const CommonOpts& copt) {
  if (!fs::is_directory(dir)) fail(ErrorKind::Usage, "'" + dir + "' is not a directory");
  std::vector<fs::path> programs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".qw") programs.push_back(entry.path());
  std::sort(programs.begin(), programs.end());
  if (programs.empty()) fail(ErrorKind::Usage, "no .qw programs under '" + dir + "'");

  bool all = true;
  json out = json::array();
  for (const auto& path : programs) {
    std::string name = path.filename().string();
    try {
      VarTable vt;
      Program p = load_program(slurp(path.string()), vt);
      fs::path side = fs::path(path).replace_extension(".inv");
      if (fs::exists(side)) {
        SidecarFile sc = parse_sidecar(slurp(side.string()));
        CheckOptions opt;
        opt.seed = seed;
        opt.random_states = random_states;
        opt.tol = copt.tol;
        opt.fix = fix_of(copt);
        CheckReport rep = run_check(vt, p, sc, opt);
        std::cout << name << ": " << (rep.pass ? "PASS" : "FAIL");
        if (rep.bound.present) std::cout << " (bound " << rep.bound.at_default << ")";
        std::cout << "\n";
        all = all && rep.pass;
        out.push_back({{"program", name}, {"report", check_report_json(rep)}});
      } else {
        std::cout << name << ": parsed (no sidecar)\n";
        out.push_back({{"program", name}, {"report", nullptr}});
      }
    } catch (const Error& e) {
      std::cout << name << ": ERROR — " << e.what() << "\n";
      all = false;
      out.push_back({{"program", name}, {"error", e.what()}});
    }
  }
  std::cout << "corpus: " << (all ? "PASS" : "FAIL") << "\n";
  maybe_write_json(copt.json_path, out);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"expected-cost analysis for classical-quantum while programs"};
  app.require_subcommand(1);

  CommonOpts copt;
  std::string file, cost = "ecost", cont = "zero", inv_path, dir = "corpus";
  int steps = 0;
  double slack = 1e-6;
  std::int64_t branch_cap = 1000000;
  std::uint64_t seed = 1;
  int random_states = 200;

  auto add_common = [&](CLI::App* sub, bool with_init) {
    sub->add_option("--json", copt.json_path, "write a JSON report to this path");
    sub->add_option("--max-iter", copt.max_iter, "fixpoint iteration cap");
    sub->add_option("--tol", copt.tol, "numeric tolerance");
    if (with_init)
      sub->add_option("--init", copt.init_json,
                      "initial state as JSON: {\"amps\":[[re,im],...],\"store\":{...}}");
  };

  CLI::App* c_parse = app.add_subcommand("parse", "parse, expand and type-check a program");
  c_parse->add_option("file", file)->required();
  c_parse->add_option("--json", copt.json_path, "write the layout to this path");

  CLI::App* c_run = app.add_subcommand("run", "expand the forward semantics for n steps");
  c_run->add_option("file", file)->required();
  c_run->add_option("--steps", steps, "number of lifted steps")->required();
  c_run->add_option("--branch-cap", branch_cap, "live branch cap");
  add_common(c_run, true);

  CLI::App* c_wp = app.add_subcommand("wp", "backward expectation transformer at one state");
  c_wp->add_option("file", file)->required();
  c_wp->add_option("--cost-structure,--cost", cost, "ecost | value | wp | denot");
  c_wp->add_option("--cont", cont, "continuation: 'zero' or a file with one expectation");
  add_common(c_wp, true);

  CLI::App* c_check = app.add_subcommand("check", "check invariants and summaries from a sidecar");
  c_check->add_option("file", file)->required();
  c_check->add_option("--invariant", inv_path, "sidecar path (default: program with .inv)");
  c_check->add_option("--seed", seed, "suite seed");
  c_check->add_option("--random-states", random_states, "random states in the suite");
  add_common(c_check, false);

  CLI::App* c_adq = app.add_subcommand("adequacy",
                                       "compare forward expansion against the staged transformer");
  c_adq->add_option("file", file)->required();
  c_adq->add_option("--steps", steps, "matched depth")->required();
  c_adq->add_option("--slack", slack, "allowed gap beyond the residual mass");
  add_common(c_adq, true);

  CLI::App* c_denot = app.add_subcommand("denot", "denotational value at one state");
  c_denot->add_option("file", file)->required();
  add_common(c_denot, true);

  CLI::App* c_corpus = app.add_subcommand("corpus", "check every program in a directory");
  c_corpus->add_option("--dir", dir, "directory with .qw programs and .inv sidecars");
  c_corpus->add_option("--seed", seed, "suite seed");
  c_corpus->add_option("--random-states", random_states, "random states in the suite");
  add_common(c_corpus, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (c_parse->parsed()) return cmd_parse(file, copt.json_path);
    if (c_run->parsed()) return cmd_run(file, steps, branch_cap, copt);
    if (c_wp->parsed()) return cmd_wp(file, cost, cont, copt);
    if (c_check->parsed()) return cmd_check(file, inv_path, seed, random_states, copt);
    if (c_adq->parsed()) return cmd_adequacy(file, steps, slack, copt);
    if (c_denot->parsed()) return cmd_wp(file, "denot", cont, copt);
    if (c_corpus->parsed()) return cmd_corpus(dir, seed, random_states, copt);
  } catch (const Error& e) {
    std::cerr << "error (" << error_kind_name(e.kind) << "): " << e.what() << "\n";
    return e.kind == ErrorKind::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
