#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qclmi/core.hpp"

namespace qclmi {

// Two-mode number basis truncated at (n1_max, n2_max); flat = n1·(n2_max+1)+n2.
struct FockBasis {
  int n1_max = 40;
  int n2_max = 40;

  long dim() const { return static_cast<long>(n1_max + 1) * (n2_max + 1); }
  long flat(int n1, int n2) const { return static_cast<long>(n1) * (n2_max + 1) + n2; }
};

// H in the truncated number basis, q_k = √(ħ/2ω_k)(a+a†), p_k = i√(ħω_k/2)(a†−a),
// Weyl ordering for the Nelson cross term. Real symmetric by construction
// (momenta enter in pairs); rejected if the symmetry self-check fails.
Eigen::MatrixXd build_hamiltonian(const ModelSpec& model, const FockBasis& basis);

struct TruncationReport {
  double loss1 = 0.0, loss2 = 0.0;  // per-factor tail mass beyond n_max
  int needed1 = 0, needed2 = 0;     // smallest n_max with tail < 1e−8
};

// Product initial state in the build basis. Each factor is the isotropic
// (unit-width √ħ) packet of the phase-space density: at ω_k = 1 the amplitudes
// are exactly e^{−|α|²/2} α^n/√n! with α = (q+ip)/√(2ħ); for ω_k ≠ 1 the same
// packet is expanded over the ω_k eigenbasis by a stable two-term recurrence.
// Throws ConvergenceError (with the required n_max) when the tail exceeds 1e−8.
Eigen::VectorXcd initial_state(const DensitySpec& density, const ModelSpec& model,
                               const FockBasis& basis, TruncationReport* report = nullptr);

// Dense diagonalization once, then per-time phase synthesis (two real GEMVs).
class FockPropagator {
 public:
  FockPropagator(const ModelSpec& model, const FockBasis& basis);

  Eigen::VectorXcd propagate(const Eigen::VectorXcd& psi0, double t) const;

  const Eigen::MatrixXd& hamiltonian() const { return h_; }
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const FockBasis& basis() const { return basis_; }
  double hbar() const { return hbar_; }

 private:
  FockBasis basis_;
  double hbar_;
  Eigen::MatrixXd h_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd vecs_;
};

Eigen::MatrixXcd reduced_density(const Eigen::VectorXcd& psi, const FockBasis& basis,
                                 int subsystem);

// 1 − tr ρ² via the squared Frobenius norm (ρ Hermitian).
double linear_entropy(const Eigen::MatrixXcd& rho);

double qlmi(const Eigen::VectorXcd& psi, const FockBasis& basis);

// Population within the top two levels of either mode — truncation sentinel.
double boundary_population(const Eigen::VectorXcd& psi, const FockBasis& basis);

struct QuantumSeries {
  std::vector<double> s1, s2, i, trunc_pop;
  double max_norm_drift = 0.0;    // max |‖ψ(t)‖² − 1|
  double max_energy_drift = 0.0;  // max |⟨H⟩(t) − ⟨H⟩(0)|
  double trunc_loss = 0.0;        // initial-state tail mass (before renormalizing)
  int nmax_used = 0;
  bool escalated = false;
};

// Full series over cfg.grid via the Fock route. Boundary population beyond
// 1e−4 escalates n_max once (×1.5, capped by basis size); runs whose boundary
// population stays under 3e−2 are accepted with trunc_pop as the record, and
// anything worse throws ConvergenceError.
QuantumSeries quantum_series_fock(const ValidatedConfig& cfg, int threads);

}  // namespace qclmi
