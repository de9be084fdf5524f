#include "qet/density.hpp"

#include <Eigen/Eigenvalues>

#include "qet/errors.hpp"

namespace qet {

bool is_subdensity(const Eigen::MatrixXcd& a, double eig_tol, double trace_tol) {
  if (a.rows() != a.cols()) return false;
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-9) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -eig_tol) return false;
  return a.trace().real() <= 1.0 + trace_tol;
}

bool loewner_leq(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double eig_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::Dimension, "Loewner comparison of different dimensions");
  Eigen::MatrixXcd d = b - a;
  Eigen::MatrixXcd herm = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -eig_tol;
}

double DensityMap::total_trace() const {
  double t = 0.0;
  for (const auto& [k, m] : entries) t += m.trace().real();
  return t;
}

DensityMap density_zero(int dim) {
  DensityMap d;
  d.dim = dim;
  return d;
}

DensityMap density_of_state(const MachineState& s) {
  DensityMap d;
  d.dim = static_cast<int>(s.amps->v.size());
  Eigen::VectorXcd v(d.dim);
  for (int i = 0; i < d.dim; ++i) v(i) = s.amps->v[i];
  d.entries[s.store] = v * v.adjoint();
  return d;
}

DensityMap density_scale(double r, const DensityMap& a) {
  DensityMap d;
  d.dim = a.dim;
  if (r == 0.0) return d;
  for (const auto& [k, m] : a.entries) d.entries[k] = r * m;
  return d;
}

DensityMap density_add(const DensityMap& a, const DensityMap& b) {
  DensityMap d = a;
  if (d.dim == 0) d.dim = b.dim;
  for (const auto& [k, m] : b.entries) {
    auto it = d.entries.find(k);
    if (it == d.entries.end())
      d.entries[k] = m;
    else
      it->second += m;
  }
  return d;
}

bool density_leq(const DensityMap& a, const DensityMap& b, double eig_tol) {
  Eigen::MatrixXcd zero;
  std::map<Store, char> keys;
  for (const auto& [k, m] : a.entries) keys[k] = 1;
  for (const auto& [k, m] : b.entries) keys[k] = 1;
  int dim = a.dim ? a.dim : b.dim;
  zero = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [k, _] : keys) {
    auto ia = a.entries.find(k);
    auto ib = b.entries.find(k);
    const Eigen::MatrixXcd& ma = ia == a.entries.end() ? zero : ia->second;
    const Eigen::MatrixXcd& mb = ib == b.entries.end() ? zero : ib->second;
    if (!loewner_leq(ma, mb, eig_tol)) return false;
  }
  return true;
}

double density_gap(const DensityMap& a, const DensityMap& b) {
  double gap = 0.0;
  std::map<Store, char> keys;
  for (const auto& [k, m] : a.entries) keys[k] = 1;
  for (const auto& [k, m] : b.entries) keys[k] = 1;
  int dim = a.dim ? a.dim : b.dim;
  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [k, _] : keys) {
    auto ia = a.entries.find(k);
    auto ib = b.entries.find(k);
    const Eigen::MatrixXcd& ma = ia == a.entries.end() ? zero : ia->second;
    const Eigen::MatrixXcd& mb = ib == b.entries.end() ? zero : ib->second;
    gap = std::max(gap, (ma - mb).cwiseAbs().maxCoeff());
  }
  return gap;
}

bool density_approx_eq(const DensityMap& a, const DensityMap& b, double tol) {
  return density_gap(a, b) <= tol;
}

}  // namespace qet
