#include "qclmi/quantum_gaussian.hpp"

#include <cmath>

#include "qclmi/flows.hpp"

namespace qclmi {

CovarianceState CovarianceState::coherent(const PhasePoint& center, double hbar) {
  CovarianceState s;
  s.mean << center.q1, center.p1, center.q2, center.p2;
  s.cov = 0.5 * hbar * Eigen::Matrix4d::Identity();
  return s;
}

Eigen::Matrix4d quadratic_form(const ModelSpec& m) {
  if (m.kind == ModelKind::Nelson)
    throw ConfigError("model", "nelson is not quadratic; use the Fock pipeline");
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  M(0, 0) = m.omega1 * m.omega1;
  M(1, 1) = 1.0;
  M(2, 2) = m.omega2 * m.omega2;
  M(3, 3) = 1.0;
  M(0, 2) = M(2, 0) = m.lambda;
  if (m.kind == ModelKind::Rwa) M(1, 3) = M(3, 1) = m.lambda;
  return M;
}

Eigen::Matrix4d symplectic_unit() {
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  J(0, 1) = J(2, 3) = 1.0;
  J(1, 0) = J(3, 2) = -1.0;
  return J;
}

Eigen::Matrix4d symplectic_propagator(const ModelSpec& m, double t) {
  const auto flat = analytic_flow_matrix(m, t);
  Eigen::Matrix4d S;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) S(i, j) = flat[static_cast<size_t>(4 * i + j)];
  return S;
}

CovarianceState evolve(const CovarianceState& state, const Eigen::Matrix4d& S) {
  CovarianceState out;
  out.mean = S * state.mean;
  out.cov = S * state.cov * S.transpose();
  return out;
}

double reduced_purity(const CovarianceState& state, int subsystem, double hbar) {
  if (subsystem != 1 && subsystem != 2) throw ConfigError("subsystem", "must be 1 or 2");
  const int o = subsystem == 1 ? 0 : 2;
  const Eigen::Matrix2d sig = state.cov.block<2, 2>(o, o);
  const double det = sig.determinant();
  const double floor = 0.25 * hbar * hbar;
  if (det < floor * (1.0 - 1e-9))
    throw ConvergenceError("uncertainty", "det sigma_k below (hbar/2)^2: state not physical");
  return 0.5 * hbar / std::sqrt(det);
}

double global_purity(const CovarianceState& state, double hbar) {
  const double det = state.cov.determinant();
  return 0.25 * hbar * hbar / std::sqrt(det);
}

GaussianEntropies gaussian_entropies(const CovarianceState& state, double hbar,
                                     double purity_tol) {
  GaussianEntropies e;
  e.s1 = 1.0 - reduced_purity(state, 1, hbar);
  e.s2 = 1.0 - reduced_purity(state, 2, hbar);
  e.global_impurity = 1.0 - global_purity(state, hbar);
  if (std::abs(e.global_impurity) > purity_tol)
    throw ConvergenceError("global_purity",
                           "pure-state evolution drifted: |1 - purity| = " +
                               std::to_string(std::abs(e.global_impurity)));
  e.i = e.s1 + e.s2 - e.s1 * e.s2;  // S(t) = 0 for globally pure states
  return e;
}

double qlmi_gaussian(const CovarianceState& state, double hbar) {
  return gaussian_entropies(state, hbar).i;
}

GaussianEntropies qlmi_gaussian_at(const ModelSpec& model, const PhasePoint& center, double t) {
  const CovarianceState s0 = CovarianceState::coherent(center, model.hbar);
  const CovarianceState st = evolve(s0, symplectic_propagator(model, t));
  return gaussian_entropies(st, model.hbar);
}

}  // namespace qclmi
