#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qet/errors.hpp"
#include "qet/pars.hpp"
#include "support.hpp"

using namespace qet;
using qet::testing::config_at;
using qet::testing::load_corpus;
using qet::testing::nth_loop;

namespace {

ExpansionReport expand_one(const VarTable& vt, Config cfg, int steps,
                           std::int64_t cap = 1000000) {
  return expand(vt, {WeightedConfig{1.0, std::move(cfg)}}, steps, cap);
}

}  // namespace

TEST_CASE("coin-toss expansion from the loop head matches the worked trace") {
  VarTable vt;
  Program p = load_corpus("ct.qw", vt);
  MachineState st = initial_state(vt);
  st.store.bools[0] = 1;                 // x = true
  st.amps = make_amps({cplx(0, 0), cplx(1, 0)});  // |1>

  // each iteration from the loop head takes 4 steps:
  // guard, Hadamard, measurement, consume
  auto r4 = expand_one(vt, config_at(nth_loop(p, 0), st), 4);
  CHECK(r4.cost == doctest::Approx(1.0));
  CHECK(r4.terminal_mass == doctest::Approx(0.0));
  CHECK(r4.running_mass == doctest::Approx(1.0));
  CHECK(r4.running.size() == 2);
  CHECK(r4.running[0].weight == doctest::Approx(0.5));
  CHECK(r4.running[1].weight == doctest::Approx(0.5));

  auto r8 = expand_one(vt, config_at(nth_loop(p, 0), st), 8);
  CHECK(r8.cost == doctest::Approx(1.5));
  CHECK(r8.terminal_mass == doctest::Approx(0.5));

  // the two stage-8 running branches merge into the stage-4 pair again
  CHECK(r8.running.size() == 2);
  CHECK(r8.running_mass == doctest::Approx(0.5));
}

TEST_CASE("mass is conserved and reports are deterministic") {
  VarTable vt;
  Program p = load_corpus("rus.qw", vt);
  for (int steps : {1, 5, 17, 40}) {
    auto a = expand_one(vt, initial_config(p, vt), steps);
    auto b = expand_one(vt, initial_config(p, vt), steps);
    CHECK(a.terminal_mass + a.running_mass + a.dropped_mass ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.cost == b.cost);
    CHECK(a.terminal_mass == b.terminal_mass);
    CHECK(a.running.size() == b.running.size());
    CHECK(a.steps == steps);
  }
}

TEST_CASE("finite-stage expected cost grows monotonically to the limit") {
  VarTable vt;
  Program p = load_corpus("ct.qw", vt);
  Config cfg = initial_config(p, vt);

  double prev = 0.0;
  for (int n = 0; n <= 60; n += 4) {
    auto r = ecost_approx(vt, cfg, n);
    CHECK(r.lower_bound >= prev - 1e-12);
    prev = r.lower_bound;
  }
  // from the default |0> state the loop exits after one flip half the time
  auto deep = ecost_approx(vt, cfg, 400);
  CHECK(deep.lower_bound == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("consume adds the evaluated amount once") {
  VarTable vt;
  Program p = load_program("int n; n = 5; consume(n);", vt);
  auto r = expand_one(vt, initial_config(p, vt), 2);
  CHECK(r.cost == doctest::Approx(5.0));
  CHECK(r.terminal_mass == doctest::Approx(1.0));
  CHECK(r.steps == 2);

  // negative consumption clamps at zero
  VarTable v2;
  Program p2 = load_program("int n; n = 3; consume(0 - n);", v2);
  auto r2 = expand_one(v2, initial_config(p2, v2), 2);
  CHECK(r2.cost == doctest::Approx(0.0));
}

TEST_CASE("stepping a terminal configuration is an error") {
  VarTable vt;
  Program p = load_program("bool x; skip;", vt);
  auto r = expand_one(vt, initial_config(p, vt), 1);
  REQUIRE(r.terminals.size() == 1);
  CHECK_THROWS_AS(step(vt, r.terminals[0].cfg), Error);
}

TEST_CASE("branch merging keeps the frontier small on the coin toss") {
  VarTable vt;
  Program p = load_corpus("ct.qw", vt);
  auto r = expand_one(vt, initial_config(p, vt), 200);
  // without merging the frontier would double every iteration
  CHECK(r.running.size() <= 2);
  CHECK(r.terminals.size() <= 2);
  CHECK_FALSE(r.truncated);
  CHECK(r.dropped_mass == doctest::Approx(0.0));
}

TEST_CASE("the branch cap truncates lightest-first and reports it") {
  // n accumulates the measurement history in binary, so the 2^k running
  // branches all have distinct stores and cannot merge
  VarTable vt;
  Program p = load_program(
      "bool x; int n; int k; qreg q[2];"
      "k = 0; n = 0;"
      "while (k < 10) {"
      "  q *= H; x = meas(q); n = n + n;"
      "  if (x) { n = n + 1; } else { skip; }"
      "  k = k + 1; consume(1);"
      "}",
      vt);
  auto full = expand_one(vt, initial_config(p, vt), 90);
  CHECK_FALSE(full.truncated);
  auto capped = expand_one(vt, initial_config(p, vt), 90, 8);
  CHECK(capped.truncated);
  CHECK(capped.dropped_mass > 0.0);
  CHECK(capped.terminal_mass + capped.running_mass + capped.dropped_mass ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(capped.cost < full.cost);
}

TEST_CASE("expected values over the normal form weight terminal states only") {
  VarTable vt;
  Program p = load_corpus("ct.qw", vt);
  Config cfg = initial_config(p, vt);

  auto ones = expected_value_approx(vt, cfg, 100, [](const MachineState&) { return 1.0; });
  CHECK(ones.lower_bound == doctest::Approx(ones.terminal_mass));
  CHECK(ones.terminal_mass > 0.99);

  // on exit of the coin toss x is false in every terminal state
  auto xs = expected_value_approx(
      vt, cfg, 100, [&](const MachineState& s) { return s.store.bools[0] ? 1.0 : 0.0; });
  CHECK(xs.lower_bound == doctest::Approx(0.0));
}

TEST_CASE("measurement branches below the pruning threshold disappear") {
  // rotate barely away from |0>: the |1> outcome has probability ~1e-26
  VarTable vt;
  Program p = load_program(
      "bool x; qreg q[2];"
      "q *= [[1, -0.0000001], [0.0000001, 1]];"
      "x = meas(q);",
      vt);
  auto r = expand_one(vt, initial_config(p, vt), 2);
  REQUIRE(r.terminals.size() == 1);
  CHECK(r.terminals[0].cfg.state.store.bools[0] == 0);
  CHECK(r.terminal_mass == doctest::Approx(1.0));
}
