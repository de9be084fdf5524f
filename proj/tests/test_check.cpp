#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "qet/check.hpp"
#include "qet/errors.hpp"
#include "qet/pars.hpp"
#include "support.hpp"

using namespace qet;
using qet::testing::corpus_path;
using qet::testing::load_corpus;
using qet::testing::read_file;

namespace {

CheckReport check_corpus(const std::string& base, CheckOptions opt = {}) {
  VarTable vt;
  Program p = load_corpus(base + ".qw", vt);
  SidecarFile sc = parse_sidecar(read_file(corpus_path(base + ".inv")));
  return run_check(vt, p, sc, opt);
}

CheckReport check_text(const std::string& prog, const std::string& sidecar,
                       CheckOptions opt = {}) {
  VarTable vt;
  Program p = load_program(prog, vt);
  SidecarFile sc = parse_sidecar(sidecar);
  return run_check(vt, p, sc, opt);
}

const SummaryReport& summary_named(const CheckReport& r, const std::string& label) {
  for (const auto& s : r.summaries)
    if (s.label == label) return s;
  REQUIRE(false);
  return r.summaries.front();
}

}  // namespace

TEST_CASE("coin-toss invariant certifies the interference-aware bound") {
  CheckReport r = check_corpus("ct");
  CHECK(r.pass);
  REQUIRE(r.invariants.size() == 1);
  CHECK(r.invariants[0].pass);
  CHECK(r.invariants[0].worst_exit_residual >= -1e-9);
  CHECK(r.invariants[0].worst_step_residual >= -1e-9);
  REQUIRE(r.bound.present);
  CHECK(r.bound.at_default == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("repeat-until-success certifies a constant bound of eight thirds") {
  CheckReport r = check_corpus("rus");
  CHECK(r.pass);
  REQUIRE(r.bound.present);
  CHECK(r.bound.at_default == doctest::Approx(8.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("an invariant below the true cost is rejected with its residual") {
  VarTable vt;
  Program p = load_corpus("rus.qw", vt);
  SidecarFile sc = parse_sidecar("(invariant loop0 (mul (ind x) (const 1)))");
  CheckReport r = run_check(vt, p, sc, {});
  CHECK_FALSE(r.pass);
  REQUIRE(r.invariants.size() == 1);
  CHECK_FALSE(r.invariants[0].pass);
  // the body costs 2 and restarts with probability 3/4: 2 + 1/4 = 2.25 > 1
  CHECK(r.invariants[0].worst_step_residual == doctest::Approx(-1.25).epsilon(1e-6));
  CHECK(r.invariants[0].detail.find("exceeds") != std::string::npos);
}

TEST_CASE("an equality summary of the fusion block verifies on the suite") {
  CheckReport r = check_corpus("fuse");
  CHECK(r.pass);
  const SummaryReport& s = summary_named(r, "fuse");
  CHECK(s.pass);
  CHECK_FALSE(s.conditional);
  CHECK(std::fabs(s.worst_residual) <= 1e-9);
  CHECK(s.basis_size >= 3);
}

TEST_CASE("nested loop summaries certify the four-station chain bound") {
  CheckReport r = check_corpus("chain4");
  CHECK(r.pass);
  CHECK(r.summaries.size() == 6);
  CHECK_FALSE(summary_named(r, "fuse1").conditional);
  CHECK_FALSE(summary_named(r, "fuse2").conditional);
  CHECK_FALSE(summary_named(r, "fuse3").conditional);
  CHECK(summary_named(r, "stage1").conditional);
  CHECK(summary_named(r, "stage2").conditional);
  CHECK(summary_named(r, "chain4").conditional);
  for (const auto& s : r.summaries) CHECK(s.pass);
  REQUIRE(r.bound.present);
  CHECK(r.bound.at_default == doctest::Approx(36.0).epsilon(1e-6));
}

TEST_CASE("the bounded-retry chain certifies its whole-program budget") {
  CheckReport r = check_corpus("chain_k4");
  CHECK(r.pass);
  REQUIRE(r.bound.present);
  CHECK(r.bound.at_default == doctest::Approx(1184.0).epsilon(1e-6));
  // the prefix resets t and re-prepares, so every suite state gets one bound
  CHECK(r.bound.min_over_suite == doctest::Approx(1184.0).epsilon(1e-6));
  CHECK(r.bound.max_over_suite == doctest::Approx(1184.0).epsilon(1e-6));
}

TEST_CASE("walker invariants certify on both ring sizes") {
  CheckReport r2 = check_corpus("walk_n2");
  CHECK(r2.pass);
  REQUIRE(r2.bound.present);
  CHECK(r2.bound.at_default == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r2.bound.max_over_suite <= 2.0 + 1e-6);

  CheckReport r3 = check_corpus("walk_n3");
  CHECK(r3.pass);
  REQUIRE(r3.bound.present);
  CHECK(r3.bound.at_default == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("summary substitution refuses clobbered live variables") {
  // the collapsing measurement makes the final outcome exactly fifty-fifty
  // from any entry state, so the summary itself verifies; the block also
  // scribbles on y, which the summary does not describe
  std::string prog =
      "bool x; bool y; qreg q[2];"
      "x = true;"
      "while (x) {"
      "  @summary(s) { y = meas(q); q *= H; x = meas(q); y = x; consume(1); }"
      "}";
  std::string sidecar =
      "(summary s (cost 1) (outcome 1/2 ((x 0))) (outcome 1/2 ((x 1))))"
      "(invariant loop0 (add (mul (ind x) (const 2)) (mul (ind y) (const 1))))";
  CheckReport r = check_text(prog, sidecar);
  CHECK_FALSE(r.pass);
  REQUIRE(r.invariants.size() == 1);
  CHECK_FALSE(r.invariants[0].pass);
  CHECK(r.invariants[0].detail.find("'y'") != std::string::npos);

  // the same invariant without the y-term goes through
  std::string good =
      "(summary s (cost 1) (outcome 1/2 ((x 0))) (outcome 1/2 ((x 1))))"
      "(invariant loop0 (mul (ind x) (const 2)))";
  CheckReport ok = check_text(prog, good);
  CHECK(ok.pass);
}

TEST_CASE("summary substitution refuses quantum invariants") {
  std::string prog =
      "bool x; qreg q[2];"
      "x = true;"
      "while (x) { @summary(s) { q *= H; x = meas(q); consume(1); } }";
  std::string sidecar =
      "(summary s (cost 1) (outcome 1/2 ((x 0))) (outcome 1/2 ((x 1))))"
      "(invariant loop0 (add (mul (ind x) (const 2)) (quadform (q) [[1, 0], [0, 1]])))";
  CheckReport r = check_text(prog, sidecar);
  CHECK_FALSE(r.pass);
  REQUIRE(r.invariants.size() == 1);
  CHECK(r.invariants[0].detail.find("classical") != std::string::npos);
}

TEST_CASE("upper-bound summaries pass where equalities fail") {
  std::string prog = "bool x; @summary(s) { consume(1); }";
  CheckReport le = check_text(prog, "(summary s (le) (cost 5) (outcome 1 ()))");
  CHECK(summary_named(le, "s").pass);

  CheckReport eq = check_text(prog, "(summary s (cost 5) (outcome 1 ()))");
  CHECK_FALSE(summary_named(eq, "s").pass);
  CHECK_FALSE(eq.pass);

  CheckReport exact = check_text(prog, "(summary s (cost 1) (outcome 1 ()))");
  CHECK(summary_named(exact, "s").pass);
}

TEST_CASE("summaries quantify over every described variable") {
  // claiming the wrong outcome distribution must fail on some basis element
  std::string prog =
      "bool x; qreg q[2];"
      "@summary(s) { x = meas(q); q *= H; x = meas(q); consume(1); }";
  CheckReport wrong =
      check_text(prog, "(summary s (cost 1) (outcome 3/4 ((x 0))) (outcome 1/4 ((x 1))))");
  CHECK_FALSE(summary_named(wrong, "s").pass);

  CheckReport right =
      check_text(prog, "(summary s (cost 1) (outcome 1/2 ((x 0))) (outcome 1/2 ((x 1))))");
  CHECK(summary_named(right, "s").pass);
}

TEST_CASE("labels resolve to summary blocks and positional loops") {
  VarTable vt;
  Program p = load_corpus("chain4.qw", vt);
  LabelMap lm = collect_labels(p);
  REQUIRE(lm.loops.size() == 3);
  CHECK(lm.find("loop0") == lm.loops[0]);
  CHECK(lm.find("loop2") == lm.loops[2]);
  CHECK(lm.find("loop3") == nullptr);
  CHECK(lm.find("fuse1") != nullptr);
  CHECK(lm.find("fuse1")->op == SOp::Summarized);
  CHECK(lm.find("chain4") != nullptr);
  CHECK(lm.find("nope") == nullptr);
  // the outer while encloses the two stage loops
  CHECK(lm.loops[0]->op == SOp::While);
}

TEST_CASE("sidecar files parse their three forms and reject malformed ones") {
  SidecarFile sc = parse_sidecar(
      "; a comment line\n"
      "(post (const 3))\n"
      "(invariant loop0 (const 1))\n"
      "(summary s (le) (cost 4) (outcome 1 ((x 1))))\n");
  CHECK(sc.post->cval == doctest::Approx(3.0));
  REQUIRE(sc.invariants.size() == 1);
  CHECK(sc.invariants[0].first == "loop0");
  REQUIRE(sc.summaries.size() == 1);
  CHECK(sc.summaries[0].upper_only);
  CHECK(sc.summaries[0].cost == doctest::Approx(4.0));
  REQUIRE(sc.summaries[0].outcomes.size() == 1);
  CHECK(sc.summaries[0].outcomes[0].prob == doctest::Approx(1.0));

  CHECK(parse_sidecar("").post->cval == 0.0);
  CHECK_THROWS_AS(parse_sidecar("(summary s (outcome 1 ((x 1))))"), Error);
  CHECK_THROWS_AS(parse_sidecar("(invariant loop0)"), Error);
  CHECK_THROWS_AS(parse_sidecar("(frobnicate)"), Error);
  CHECK_THROWS_AS(parse_sidecar("(summary s (cost 1) (outcome 1 ((x 0.5))))"), Error);
}

TEST_CASE("bounds are refused when code follows the final loop") {
  std::string prog =
      "bool x; qreg q[2];"
      "x = true;"
      "while (x) { q *= H; x = meas(q); consume(1); }"
      "x = true;";
  CheckReport r = check_text(prog, "(invariant loop0 (mul (ind x) (const 2)))");
  REQUIRE(r.invariants.size() == 1);
  CHECK(r.invariants[0].pass);
  CHECK_FALSE(r.bound.present);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.bound.detail.empty());
}

TEST_CASE("bounds compose the loop-free prefix with the tail invariant") {
  std::string prog =
      "bool x; qreg q[2];"
      "consume(5);"
      "x = true;"
      "while (x) { q *= H; x = meas(q); consume(1); }";
  CheckReport r = check_text(prog, "(invariant loop0 (mul (ind x) (const 2)))");
  CHECK(r.pass);
  REQUIRE(r.bound.present);
  CHECK(r.bound.at_default == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("loop-free programs bound through the post-expectation alone") {
  CheckReport r = check_text("bool x; consume(3);", "(post (const 2))");
  CHECK(r.pass);
  REQUIRE(r.bound.present);
  CHECK(r.bound.at_default == doctest::Approx(5.0));
}

TEST_CASE("certified bounds dominate finite-stage forward costs") {
  for (const char* base : {"ct", "rus", "walk_n2"}) {
    CAPTURE(base);
    CheckReport r = check_corpus(base);
    REQUIRE(r.bound.present);
    VarTable vt;
    Program p = load_corpus(std::string(base) + ".qw", vt);
    auto fwd = ecost_approx(vt, initial_config(p, vt), 400);
    CHECK(fwd.lower_bound <= r.bound.at_default + 1e-9);
  }
}
