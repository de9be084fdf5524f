#include "qet/state.hpp"

#include <cmath>
#include <numbers>

#include "qet/errors.hpp"

namespace qet {

namespace {

constexpr double kQuantum = 1e-12;  // amplitude quantization for merging
constexpr double kBranchEps = 1e-12;

std::int64_t quantize(double x) {
  return std::llround(x / kQuantum);
}

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t x) {
  h ^= x;
  h *= 1099511628211ull;
  return h;
}

}  // namespace

Amps::Amps(std::vector<cplx> a) : v(std::move(a)) {
  std::uint64_t h = 1469598103934665603ull;
  for (const cplx& c : v) {
    h = fnv_mix(h, static_cast<std::uint64_t>(quantize(c.real())));
    h = fnv_mix(h, static_cast<std::uint64_t>(quantize(c.imag())));
  }
  sig = h;
}

AmpsPtr make_amps(std::vector<cplx> a) { return std::make_shared<const Amps>(std::move(a)); }

MachineState initial_state(const VarTable& vt) {
  MachineState s;
  s.store.bools.assign(vt.bools.size(), 0);
  s.store.ints.assign(vt.ints.size(), 0);
  std::vector<cplx> v(static_cast<std::size_t>(vt.total_dim), cplx(0.0, 0.0));
  v[0] = cplx(1.0, 0.0);
  s.amps = make_amps(std::move(v));
  return s;
}

std::uint64_t store_hash(const Store& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::uint8_t b : s.bools) h = fnv_mix(h, b);
  for (std::int64_t i : s.ints) h = fnv_mix(h, static_cast<std::uint64_t>(i));
  return h;
}

std::uint64_t state_sig(const MachineState& s) {
  return fnv_mix(store_hash(s.store), s.amps ? s.amps->sig : 0);
}

bool states_equivalent(const MachineState& a, const MachineState& b) {
  if (!(a.store == b.store)) return false;
  if (a.amps == b.amps) return true;
  if (!a.amps || !b.amps) return false;
  const auto& x = a.amps->v;
  const auto& y = b.amps->v;
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (quantize(x[i].real()) != quantize(y[i].real())) return false;
    if (quantize(x[i].imag()) != quantize(y[i].imag())) return false;
  }
  return true;
}

// --- classical evaluation ----------------------------------------------------

namespace {

std::int64_t checked(std::int64_t a, std::int64_t b, AOp op, int line, int col) {
  std::int64_t r = 0;
  bool ovf = false;
  switch (op) {
    case AOp::Add: ovf = __builtin_add_overflow(a, b, &r); break;
    case AOp::Sub: ovf = __builtin_sub_overflow(a, b, &r); break;
    case AOp::Mul: ovf = __builtin_mul_overflow(a, b, &r); break;
    default: break;
  }
  if (ovf) fail(ErrorKind::Overflow, "int64 overflow in arithmetic expression", line, col);
  return r;
}

}  // namespace

std::int64_t eval_aexp(const AExp& e, const Store& s) {
  switch (e.op) {
    case AOp::Num:
      return e.num;
    case AOp::Var:
      if (e.resolved < 0) fail(ErrorKind::Internal, "unresolved int variable '" + e.var + "'");
      return s.ints[e.resolved];
    case AOp::Add:
    case AOp::Sub:
    case AOp::Mul:
      return checked(eval_aexp(*e.lhs, s), eval_aexp(*e.rhs, s), e.op, e.line, e.col);
  }
  fail(ErrorKind::Internal, "unhandled arithmetic operator");
}

bool eval_bexp(const BExp& e, const Store& s) {
  switch (e.op) {
    case BOp::Lit:
      return e.lit;
    case BOp::Var:
      if (e.resolved < 0) fail(ErrorKind::Internal, "unresolved bool variable '" + e.var + "'");
      return s.bools[e.resolved] != 0;
    case BOp::Not:
      return !eval_bexp(*e.blhs, s);
    case BOp::And:
      return eval_bexp(*e.blhs, s) && eval_bexp(*e.brhs, s);
    case BOp::Or:
      return eval_bexp(*e.blhs, s) || eval_bexp(*e.brhs, s);
    case BOp::Eq:
      return eval_aexp(*e.alhs, s) == eval_aexp(*e.arhs, s);
    case BOp::Le:
      return eval_aexp(*e.alhs, s) <= eval_aexp(*e.arhs, s);
    case BOp::Lt:
      return eval_aexp(*e.alhs, s) < eval_aexp(*e.arhs, s);
  }
  fail(ErrorKind::Internal, "unhandled boolean operator");
}

// --- gates ---------------------------------------------------------------------

Matrix builtin_matrix(GateKind kind, const std::vector<int>& dims) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case GateKind::H:
      return {{r, r}, {r, -r}};
    case GateKind::X:
      return {{0, 1}, {1, 0}};
    case GateKind::T: {
      cplx w = std::exp(cplx(0.0, std::numbers::pi / 4.0));
      return {{cplx(1, 0), cplx(0, 0)}, {cplx(0, 0), w}};
    }
    case GateKind::CNOT:
      return {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};
    case GateKind::CZ:
      return {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, -1}};
    case GateKind::SHIFT: {
      // |0,i> -> |0,(i-1) mod n>, |1,i> -> |1,(i+1) mod n>
      if (dims.size() != 2 || dims[0] != 2)
        fail(ErrorKind::Dimension, "SHIFT needs a 2-dimensional direction register");
      int n = dims[1];
      Matrix m(2 * n, std::vector<cplx>(2 * n, cplx(0, 0)));
      for (int i = 0; i < n; ++i) {
        m[((i - 1) % n + n) % n][i] = 1.0;            // left block
        m[n + (i + 1) % n][n + i] = 1.0;              // right block
      }
      return m;
    }
    case GateKind::Matrix:
      fail(ErrorKind::Internal, "matrix literal has no builtin form");
  }
  fail(ErrorKind::Internal, "unhandled gate kind");
}

bool is_unitary(const Matrix& m, double tol) {
  std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx dot(0, 0);
      for (std::size_t k = 0; k < n; ++k) dot += std::conj(m[k][i]) * m[k][j];
      cplx want = i == j ? cplx(1, 0) : cplx(0, 0);
      if (std::abs(dot - want) > tol) return false;
    }
  }
  return true;
}

Matrix stmt_gate_matrix(const VarTable& vt, const Stmt& s) {
  if (s.unitary.kind == GateKind::Matrix) return s.unitary.mat;
  std::vector<int> dims;
  for (int r : s.resolved_regs) dims.push_back(vt.dims[r]);
  return builtin_matrix(s.unitary.kind, dims);
}

// --- unitary application / measurement -----------------------------------------

namespace {

struct TargetSpan {
  std::vector<std::int64_t> offsets;  // amplitude offsets per target digit combo
  std::int64_t block = 1;             // product of target dims
  std::vector<std::int64_t> strides;  // target strides, most significant first
  std::vector<int> dims;
};

TargetSpan target_span(const VarTable& vt, const std::vector<int>& regs) {
  TargetSpan t;
  for (int r : regs) {
    t.dims.push_back(vt.dims[r]);
    t.strides.push_back(vt.strides[r]);
    t.block *= vt.dims[r];
  }
  t.offsets.assign(static_cast<std::size_t>(t.block), 0);
  for (std::int64_t j = 0; j < t.block; ++j) {
    std::int64_t rem = j, off = 0;
    for (int k = static_cast<int>(t.dims.size()) - 1; k >= 0; --k) {
      off += (rem % t.dims[k]) * t.strides[k];
      rem /= t.dims[k];
    }
    t.offsets[j] = off;
  }
  return t;
}

bool digits_zero(std::int64_t idx, const TargetSpan& t) {
  for (std::size_t k = 0; k < t.dims.size(); ++k)
    if ((idx / t.strides[k]) % t.dims[k] != 0) return false;
  return true;
}

}  // namespace

AmpsPtr apply_unitary(const VarTable& vt, const AmpsPtr& amps, const std::vector<int>& regs,
                      const Matrix& m) {
  const std::int64_t n = static_cast<std::int64_t>(amps->v.size());
  TargetSpan t = target_span(vt, regs);
  if (static_cast<std::int64_t>(m.size()) != t.block)
    fail(ErrorKind::Dimension, "gate dimension does not match its target registers");
  std::vector<cplx> out = amps->v;
  std::vector<cplx> x(static_cast<std::size_t>(t.block));
  for (std::int64_t base = 0; base < n; ++base) {
    if (!digits_zero(base, t)) continue;
    for (std::int64_t j = 0; j < t.block; ++j) x[j] = amps->v[base + t.offsets[j]];
    for (std::int64_t i = 0; i < t.block; ++i) {
      cplx acc(0, 0);
      const auto& row = m[i];
      for (std::int64_t j = 0; j < t.block; ++j) acc += row[j] * x[j];
      out[base + t.offsets[i]] = acc;
    }
  }
  return make_amps(std::move(out));
}

std::vector<MeasBranch> measure(const VarTable& vt, const AmpsPtr& amps, int reg,
                                bool zero_vs_rest) {
  const int dim = vt.dims[reg];
  if (!zero_vs_rest && dim != 2)
    fail(ErrorKind::Dimension, "meas needs a 2-dimensional register");
  const std::int64_t stride = vt.strides[reg];
  const std::int64_t n = static_cast<std::int64_t>(amps->v.size());

  auto outcome_of_digit = [&](std::int64_t digit) -> int {
    if (zero_vs_rest) return digit == 0 ? 0 : 1;
    return static_cast<int>(digit);
  };

  double p[2] = {0.0, 0.0};
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t digit = (i / stride) % dim;
    p[outcome_of_digit(digit)] += std::norm(amps->v[i]);
  }

  std::vector<MeasBranch> out;
  for (int k = 0; k < 2; ++k) {
    if (p[k] < kBranchEps) continue;
    std::vector<cplx> v(static_cast<std::size_t>(n), cplx(0, 0));
    double scale = 1.0 / std::sqrt(p[k]);
    for (std::int64_t i = 0; i < n; ++i) {
      std::int64_t digit = (i / stride) % dim;
      if (outcome_of_digit(digit) == k) v[i] = amps->v[i] * scale;
    }
    out.push_back(MeasBranch{k, p[k], make_amps(std::move(v))});
  }
  return out;
}

namespace {

double quad_form_impl(const AmpsPtr& amps, const TargetSpan& t, const Matrix& q) {
  const std::int64_t n = static_cast<std::int64_t>(amps->v.size());
  if (static_cast<std::int64_t>(q.size()) != t.block)
    fail(ErrorKind::Dimension, "quadratic form dimension does not match its registers");
  double total = 0.0;
  std::vector<cplx> x(static_cast<std::size_t>(t.block));
  for (std::int64_t base = 0; base < n; ++base) {
    if (!digits_zero(base, t)) continue;
    for (std::int64_t j = 0; j < t.block; ++j) x[j] = amps->v[base + t.offsets[j]];
    for (std::int64_t i = 0; i < t.block; ++i) {
      for (std::int64_t j = 0; j < t.block; ++j) {
        // Hermitian symmetrization (Q + Q^dagger)/2
        cplx qij = 0.5 * (q[i][j] + std::conj(q[j][i]));
        total += (std::conj(x[i]) * qij * x[j]).real();
      }
    }
  }
  return total < 0.0 && total > -1e-9 ? 0.0 : total;
}

}  // namespace

double quad_form_value(const VarTable& vt, const AmpsPtr& amps, const std::vector<int>& regs,
                       const Matrix& q) {
  return quad_form_impl(amps, target_span(vt, regs), q);
}

double quad_form_value_spans(const AmpsPtr& amps, const std::vector<int>& dims,
                             const std::vector<std::int64_t>& strides, const Matrix& q) {
  TargetSpan t;
  t.dims = dims;
  t.strides = strides;
  t.block = 1;
  for (int d : dims) t.block *= d;
  t.offsets.assign(static_cast<std::size_t>(t.block), 0);
  for (std::int64_t j = 0; j < t.block; ++j) {
    std::int64_t rem = j, off = 0;
    for (int k = static_cast<int>(t.dims.size()) - 1; k >= 0; --k) {
      off += (rem % t.dims[k]) * t.strides[k];
      rem /= t.dims[k];
    }
    t.offsets[j] = off;
  }
  return quad_form_impl(amps, t, q);
}

}  // namespace qet
