#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qet/cost.hpp"
#include "qet/density.hpp"
#include "qet/errors.hpp"
#include "qet/expectation.hpp"
#include "support.hpp"

using namespace qet;

namespace {

constexpr double kTol = 1e-9;

double rand_value(Rng& rng) {
  // mix finite values with infinity so the laws cover the extended reals
  if (rng.next_int(0, 19) == 0) return kInf;
  return rng.next_unit() * 10.0;
}

Eigen::MatrixXcd rand_density(Rng& rng, int dim, double mass) {
  Eigen::VectorXcd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cplx(rng.next_normal(), rng.next_normal());
  v.normalize();
  return mass * (v * v.adjoint());
}

DensityMap rand_density_map(Rng& rng, int dim, const VarTable& vt) {
  DensityMap d;
  d.dim = dim;
  int k = static_cast<int>(rng.next_int(1, 2));
  double mass = rng.next_unit() / k;
  for (int i = 0; i < k; ++i) {
    MachineState st = initial_state(vt);
    for (auto& b : st.store.bools) b = rng.next_int(0, 1) ? 1 : 0;
    Eigen::MatrixXcd m = rand_density(rng, dim, mass);
    auto [it, fresh] = d.entries.emplace(st.store, m);
    if (!fresh) it->second += m;
  }
  return d;
}

template <class S, class Gen>
void barycentric_laws(const S& alg, Gen gen, int samples) {
  Rng rng(0x9e3779b97f4a7c15ull);
  for (int i = 0; i < samples; ++i) {
    auto a = gen(rng);
    auto b = gen(rng);
    auto c = gen(rng);
    double r = rng.next_unit();
    double p = rng.next_unit();

    CHECK(alg.approx_eq(alg.convex(1.0, a, b), a, kTol));
    CHECK(alg.approx_eq(alg.convex(r, a, b), alg.convex(1.0 - r, b, a), kTol));
    CHECK(alg.approx_eq(alg.convex(r, a, a), a, kTol));
    if (p * r < 1.0 - 1e-6) {
      double q = (r - p * r) / (1.0 - p * r);
      auto lhs = alg.convex(r, alg.convex(p, a, b), c);
      auto rhs = alg.convex(p * r, a, alg.convex(q, b, c));
      CHECK(alg.approx_eq(lhs, rhs, 1e-7));
    }
  }
}

template <class S, class Gen>
void cost_laws(const S& alg, Gen gen, int samples) {
  Rng rng(0x853c49e6748fea9bull);
  for (int i = 0; i < samples; ++i) {
    auto s = gen(rng);
    auto s2 = gen(rng);
    double c = rng.next_unit() * 5.0;
    double d = rng.next_unit() * 5.0;
    double r = rng.next_unit();

    CHECK(alg.approx_eq(alg.cost_add(0.0, s), s, kTol));
    CHECK(alg.approx_eq(alg.cost_add(c, alg.cost_add(d, s)), alg.cost_add(c + d, s), kTol));
    auto lhs = alg.convex(r, alg.cost_add(c, s), alg.cost_add(d, s2));
    auto rhs = alg.cost_add(r * c + (1.0 - r) * d, alg.convex(r, s, s2));
    CHECK(alg.approx_eq(lhs, rhs, 1e-7));
  }
}

}  // namespace

TEST_CASE("extended reals: scaling and convex sums handle infinity") {
  CHECK(ext_scale(0.0, kInf) == 0.0);
  CHECK(ext_scale(0.5, kInf) == kInf);
  CHECK(ext_scale(0.0, 3.0) == 0.0);
  CHECK(convex_sum({}) == 0.0);
  CHECK(convex_sum({{0.5, 2.0}, {0.25, 4.0}}) == doctest::Approx(2.0));
  CHECK(convex_sum({{0.5, kInf}, {0.5, 1.0}}) == kInf);
  CHECK(convex_sum({{0.0, kInf}, {1.0, 1.0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(convex_sum({{0.7, 1.0}, {0.7, 1.0}}), Error);
  CHECK_THROWS_AS(convex_sum({{-0.1, 1.0}}), Error);
}

TEST_CASE("kleene supremum of a converging chain") {
  std::vector<double> chain;
  double acc = 0.0;
  for (int i = 0; i < 60; ++i) {
    acc += std::pow(0.5, i);
    chain.push_back(acc);
  }
  CHECK(kleene_sup(chain) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK_THROWS_AS(kleene_sup({1.0, 0.5}), Error);
  CHECK(kleene_sup({1.0, 1e13}) == kInf);
}

TEST_CASE("expected-cost structure satisfies the barycentric and cost laws") {
  EcostStructure alg;
  barycentric_laws(alg, [](Rng& r) { return rand_value(r); }, 1000);
  cost_laws(alg, [](Rng& r) { return rand_value(r); }, 1000);
  CHECK(alg.cost_add(2.0, 3.0) == 5.0);
  CHECK(alg.cost_add(2.0, kInf) == kInf);
}

TEST_CASE("value structure forgets costs and satisfies the laws") {
  ValueStructure alg;
  barycentric_laws(alg, [](Rng& r) { return rand_value(r); }, 1000);
  cost_laws(alg, [](Rng& r) { return rand_value(r); }, 1000);
  CHECK(alg.cost_add(7.0, 3.0) == 3.0);
}

TEST_CASE("probability structure clamps to [0,1] and satisfies the laws") {
  WpStructure alg;
  auto gen = [](Rng& r) { return r.next_unit(); };
  barycentric_laws(alg, gen, 1000);
  cost_laws(alg, gen, 1000);
  CHECK(alg.cost_add(7.0, 0.25) == 0.25);
}

TEST_CASE("density maps satisfy the laws under the Loewner order") {
  Program p = parse_program("bool u; bool v; qreg r[2]; skip;");
  VarTable vt = validate(p);
  DenotStructure alg;
  alg.dim = 2;
  auto gen = [&vt](Rng& r) { return rand_density_map(r, 2, vt); };
  barycentric_laws(alg, gen, 300);
  cost_laws(alg, gen, 300);
}

TEST_CASE("Loewner order distinguishes non-dominated matrices") {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2, 2);
  a(0, 0) = 0.6;
  a(1, 1) = 0.4;
  b(0, 0) = 0.5;
  b(1, 1) = 0.5;
  CHECK_FALSE(loewner_leq(a, b));
  CHECK_FALSE(loewner_leq(b, a));
  CHECK(loewner_leq(a, a));
  Eigen::MatrixXcd c = a;
  c(0, 0) = 0.7;
  CHECK(loewner_leq(a, c));

  CHECK(is_subdensity(a));
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_FALSE(is_subdensity(d * 0.8));  // trace 1.6
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(2, 2);
  e(0, 1) = 1.0;  // not Hermitian
  CHECK_FALSE(is_subdensity(e));
}

TEST_CASE("density map order and gap work over mismatched supports") {
  Program p = parse_program("bool u; qreg r[2]; skip;");
  VarTable vt = validate(p);
  MachineState st = initial_state(vt);
  DensityMap zero = density_zero(2);
  DensityMap one = density_of_state(st);
  CHECK(density_leq(zero, one));
  CHECK_FALSE(density_leq(one, zero));
  CHECK(density_gap(one, zero) == doctest::Approx(1.0));
  CHECK(one.total_trace() == doctest::Approx(1.0));
  DensityMap half = density_scale(0.5, one);
  CHECK(density_leq(half, one));
  CHECK(density_approx_eq(density_add(half, half), one, 1e-12));
}
