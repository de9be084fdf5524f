#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qet/cost.hpp"
#include "qet/errors.hpp"
#include "qet/expectation.hpp"
#include "qet/state.hpp"
#include "support.hpp"

using namespace qet;

namespace {

MachineState ct_state(const VarTable& vt, bool x, cplx a0, cplx a1) {
  MachineState st = initial_state(vt);
  st.store.bools[vt.find_bool("x")] = x ? 1 : 0;
  st.amps = make_amps({a0, a1});
  return st;
}

}  // namespace

TEST_CASE("expectation expressions parse, print, and evaluate") {
  VarTable vt;
  qet::testing::load_corpus("ct.qw", vt);

  ExpPtr e = parse_expectation(
      "(mul (ind x) (add (const 1) (quadform (q) [[1, -1], [-1, 1]])))");
  resolve_expectation(*e, vt);

  double r = 1.0 / std::sqrt(2.0);
  CHECK(eval_expectation(*e, ct_state(vt, true, 1, 0)) == doctest::Approx(2.0));
  CHECK(eval_expectation(*e, ct_state(vt, true, 0, 1)) == doctest::Approx(2.0));
  CHECK(eval_expectation(*e, ct_state(vt, true, r, r)) == doctest::Approx(1.0));
  CHECK(eval_expectation(*e, ct_state(vt, true, r, -r)) == doctest::Approx(3.0));
  CHECK(eval_expectation(*e, ct_state(vt, false, 1, 0)) == doctest::Approx(0.0));

  std::string s1 = print_expectation(*e);
  ExpPtr e2 = parse_expectation(s1);
  CHECK(print_expectation(*e2) == s1);
}

TEST_CASE("numbers admit fractions, decimals, and infinity") {
  CHECK(parse_expectation("(const 8/3)")->cval == doctest::Approx(8.0 / 3.0));
  CHECK(parse_expectation("(const 0.25)")->cval == doctest::Approx(0.25));
  CHECK(parse_expectation("(const inf)")->cval == kInf);
  CHECK(parse_expectation("7")->cval == doctest::Approx(7.0));

  VarTable vt;
  qet::testing::load_corpus("ct.qw", vt);
  MachineState st = initial_state(vt);

  ExpPtr zi = parse_expectation("(mul (const 0) (const inf))");
  CHECK(eval_expectation(*zi, st) == 0.0);
  ExpPtr si = parse_expectation("(scale 2 (const inf))");
  CHECK(eval_expectation(*si, st) == kInf);
  ExpPtr s0 = parse_expectation("(scale 0 (const inf))");
  CHECK(eval_expectation(*s0, st) == 0.0);

  CHECK_THROWS_AS(parse_expectation("(const -1)"), Error);
  CHECK_THROWS_AS(parse_expectation("(scale -2 (const 1))"), Error);
  CHECK_THROWS_AS(parse_expectation("(const 1) (const 2)"), Error);
  CHECK_THROWS_AS(parse_expectation("(frobnicate 1)"), Error);
}

TEST_CASE("arithmetic observables clamp below at zero") {
  VarTable vt;
  Program p = load_program("int t; qreg q[2]; t = 0;", vt);
  (void)p;
  MachineState st = initial_state(vt);

  ExpPtr e = parse_expectation("(arith (- t 5))");
  resolve_expectation(*e, vt);
  CHECK(eval_expectation(*e, st) == 0.0);
  st.store.ints[0] = 9;
  CHECK(eval_expectation(*e, st) == 4.0);

  ExpPtr mm = parse_expectation("(min (arith t) (const 6))");
  resolve_expectation(*mm, vt);
  CHECK(eval_expectation(*mm, st) == 6.0);
  ExpPtr mx = parse_expectation("(max (arith t) (const 100))");
  resolve_expectation(*mx, vt);
  CHECK(eval_expectation(*mx, st) == 100.0);

  ExpPtr cmp = parse_expectation("(ind (and (<= 0 t) (< t 8)))");
  resolve_expectation(*cmp, vt);
  st.store.ints[0] = 3;
  CHECK(eval_expectation(*cmp, st) == 1.0);
  st.store.ints[0] = 8;
  CHECK(eval_expectation(*cmp, st) == 0.0);
}

TEST_CASE("resolution rejects bad quadforms and unknown names") {
  VarTable vt;
  qet::testing::load_corpus("ct.qw", vt);

  ExpPtr unknown = parse_expectation("(quadform (z) [[1, 0], [0, 1]])");
  CHECK_THROWS_AS(resolve_expectation(*unknown, vt), Error);

  ExpPtr wrong_dim = parse_expectation("(quadform (q) [[1]])");
  CHECK_THROWS_AS(resolve_expectation(*wrong_dim, vt), Error);

  ExpPtr skew = parse_expectation("(quadform (q) [[0, 1], [0, 0]])");
  CHECK_THROWS_AS(resolve_expectation(*skew, vt), Error);

  ExpPtr unresolved = parse_expectation("(quadform (q) [[1, 0], [0, 1]])");
  CHECK_THROWS_AS(eval_expectation(*unresolved, initial_state(vt)), Error);

  ExpPtr unknown_bool = parse_expectation("(ind nope)");
  CHECK_THROWS_AS(resolve_expectation(*unknown_bool, vt), Error);
}

TEST_CASE("classicality, read variables, and observed registers are reported") {
  VarTable vt;
  qet::testing::load_corpus("rus.qw", vt);

  ExpPtr cls = parse_expectation("(mul (ind x) (const 8/3))");
  CHECK(classical_check(*cls));
  ExpPtr qt = parse_expectation("(add (const 1) (quadform (q) [[1, 0], [0, 1]]))");
  CHECK_FALSE(classical_check(*qt));

  std::vector<std::string> bs, is;
  expectation_vars(*cls, bs, is);
  CHECK(bs == std::vector<std::string>{"x"});
  CHECK(is.empty());

  resolve_expectation(*qt, vt);
  std::vector<int> regs = expectation_regs(*qt, vt);
  CHECK(regs == std::vector<int>{vt.find_reg("q")});
  CHECK(expectation_regs(*cls, vt).empty());
}

TEST_CASE("state suites are deterministic and cover the documented cases") {
  VarTable vt;
  Program p = load_program("bool x; int t; qreg q[2]; skip;", vt);
  (void)p;

  auto suite = make_suite(vt, 7, 42);
  // base state, one extra basis state (dim 2), ten int sweep values, 7 random
  CHECK(suite.size() == 1 + 1 + 10 + 7);

  MachineState base = initial_state(vt);
  CHECK(states_equivalent(suite[0], base));
  CHECK(std::abs(suite[1].amps->v[1] - cplx(1, 0)) < 1e-12);

  std::vector<std::int64_t> sweep;
  for (int i = 2; i < 12; ++i) sweep.push_back(suite[i].store.ints[0]);
  std::sort(sweep.begin(), sweep.end());
  CHECK(sweep == std::vector<std::int64_t>{-2, -1, 1, 2, 3, 4, 5, 6, 7, 8});

  for (const auto& st : suite) {
    double norm2 = 0.0;
    for (const auto& a : st.amps->v) norm2 += std::norm(a);
    CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-9));
  }

  auto again = make_suite(vt, 7, 42);
  REQUIRE(again.size() == suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i)
    CHECK(states_equivalent(suite[i], again[i]));

  auto other = make_suite(vt, 7, 43);
  bool all_same = true;
  for (std::size_t i = 0; i < suite.size(); ++i)
    all_same = all_same && states_equivalent(suite[i], other[i]);
  CHECK_FALSE(all_same);
}

TEST_CASE("the project RNG is deterministic and respects its ranges") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  for (int i = 0; i < 1000; ++i) {
    double u = a.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    std::int64_t k = a.next_int(-3, 3);
    CHECK(k >= -3);
    CHECK(k <= 3);
  }
  // normals should not collapse to a constant
  double first = a.next_normal();
  bool varied = false;
  for (int i = 0; i < 10; ++i) varied = varied || std::fabs(a.next_normal() - first) > 1e-12;
  CHECK(varied);
}
